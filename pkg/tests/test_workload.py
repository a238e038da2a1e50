import json

import pytest

from gaslab.evm.schedule import default_schedule
from gaslab.workload import (CODE_LIBRARY, WorkloadError, WorkloadGenerator,
                             WorkloadSpec, load_workload, save_workload)

SCHED = default_schedule()


def spec_with(**overrides):
    base = dict(transactions_per_block=2, program_length=6,
                mix={"SLOAD": 0.5, "SSTORE": 0.25, "ADD": 0.25},
                fresh_key_rate=0.5, seed=11)
    base.update(overrides)
    return WorkloadSpec(**base)


def test_mix_must_sum_to_one():
    with pytest.raises(WorkloadError, match="sum"):
        spec_with(mix={"ADD": 0.4, "SLOAD": 0.4})


def test_rate_must_be_a_probability():
    with pytest.raises(WorkloadError):
        spec_with(fresh_key_rate=1.5)


def test_unsupported_featured_opcode_rejected():
    with pytest.raises(WorkloadError, match="JUMP"):
        spec_with(mix={"JUMP": 1.0})


def test_json_round_trip(tmp_path):
    spec = spec_with()
    path = tmp_path / "w.json"
    save_workload(spec, path)
    assert load_workload(path) == spec


def test_load_rejects_unknown_fields(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"transactions_per_block": 1, "bogus": 2}))
    with pytest.raises(WorkloadError, match="bogus"):
        load_workload(path)


def test_load_rejects_non_json(tmp_path):
    path = tmp_path / "w.json"
    path.write_text("{nope")
    with pytest.raises(WorkloadError, match="JSON"):
        load_workload(path)


def test_same_spec_height_seed_gives_identical_blocks():
    spec = spec_with()
    gen_a, gen_b = WorkloadGenerator(spec, SCHED), WorkloadGenerator(spec, SCHED)
    for height in range(12):
        block_a, block_b = gen_a.generate_block(height), gen_b.generate_block(height)
        assert [t.code for t in block_a.transactions] == \
               [t.code for t in block_b.transactions]
        assert [t.gas_limit for t in block_a.transactions] == \
               [t.gas_limit for t in block_b.transactions]


def test_different_seed_changes_blocks():
    gen_a = WorkloadGenerator(spec_with(seed=1), SCHED)
    gen_b = WorkloadGenerator(spec_with(seed=2), SCHED)
    codes_a = [t.code for t in gen_a.generate_block(0).transactions]
    codes_b = [t.code for t in gen_b.generate_block(0).transactions]
    assert codes_a != codes_b


def test_blocks_must_be_generated_in_order():
    generator = WorkloadGenerator(spec_with(), SCHED)
    generator.generate_block(0)
    with pytest.raises(WorkloadError, match="order"):
        generator.generate_block(5)


def test_fresh_rate_one_appends_distinct_slots():
    spec = spec_with(transactions_per_block=1, program_length=4,
                     mix={"SSTORE": 1.0}, fresh_key_rate=1.0, initial_keys=3)
    generator = WorkloadGenerator(spec, SCHED)
    for height in range(5):
        generator.generate_block(height)
    # 5 blocks x 4 writes, all fresh, appended after the 3 genesis slots
    assert generator.pool_size == 3 + 20


def test_fresh_rate_zero_keeps_pool_constant():
    spec = spec_with(transactions_per_block=1, program_length=4,
                     mix={"SSTORE": 1.0}, fresh_key_rate=0.0, initial_keys=3)
    generator = WorkloadGenerator(spec, SCHED)
    for height in range(5):
        generator.generate_block(height)
    assert generator.pool_size == 3


def test_genesis_prefills_slots_and_library():
    from gaslab.evm.machine import code_key, storage_key
    from gaslab.trie import MerklePatriciaTrie
    spec = spec_with(initial_keys=5)
    trie = MerklePatriciaTrie()
    WorkloadGenerator(spec, SCHED).write_genesis(trie)
    for slot in range(5):
        assert trie.get(storage_key(slot)) is not None
    for code_id in CODE_LIBRARY:
        assert trie.get(code_key(code_id)) == CODE_LIBRARY[code_id]
    assert trie.key_count == 5 + len(CODE_LIBRARY)


def test_generated_programs_end_with_stop():
    generator = WorkloadGenerator(spec_with(), SCHED)
    block = generator.generate_block(0)
    for tx in block.transactions:
        assert tx.code[-1] == 0x00

"""Synthetic chain driver: generate, verify, and import blocks in order.

Each block goes through a structural verification (height continuity,
parent-root linkage, gas limits) and a strictly serialized import that
executes every transaction against the world trie and commits storage
writes. Spans land in the macro categories of the instrumentation module:
Total wraps verify plus import, TX wraps each transaction's execution, EVM
the interpreter loop inside it, and DB the storage commits (per transaction
plus a per-block finalize). Verification is structural only — signature and
proof-of-work checking live outside this laboratory's scope.

Timing runs on a wall or virtual clock (see `gaslab.clock`); everything
else — gas totals, roots, receipts — is identical across clocks and runs,
which is what the replay-determinism guarantee rests on.
"""

from __future__ import annotations

import gc
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .clock import WallClock
from .evm.machine import TxReceipt, TxStatus, execute_transaction
from .evm.schedule import GasSchedule
from .metrics import MacroCategory, SampleSink, WindowAggregate
from .trie import MerklePatriciaTrie, NodeStore
from .workload import Block, WorkloadGenerator, WorkloadSpec


class VerificationError(ValueError):
    """Block failed the structural verification check."""


class ReceiptRow(NamedTuple):
    height: int
    tx_index: int
    status: str
    gas_used: int
    gas_limit: int
    instructions: int


@dataclass
class ChainRunReport:
    windows: list[WindowAggregate]
    receipts: list[ReceiptRow]
    final_root: bytes
    initial_keys: int
    final_keys: int
    num_blocks: int
    window_size: int
    clock_mode: str
    spec: WorkloadSpec


def verify_block(block: Block, expected_height: int, parent_root: bytes,
                 schedule: GasSchedule) -> None:
    if block.height != expected_height:
        raise VerificationError(
            f"expected height {expected_height}, got {block.height}")
    if block.parent_root is not None and block.parent_root != parent_root:
        raise VerificationError("parent root does not link to current state")
    for i, tx in enumerate(block.transactions):
        if tx.gas_limit < schedule.intrinsic_gas:
            raise VerificationError(
                f"tx {i}: gas limit {tx.gas_limit} below intrinsic")
        if tx.gas_price < 0:
            raise VerificationError(f"tx {i}: negative gas price")


def _median_receipt(receipts: list[TxReceipt]) -> TxReceipt:
    """Combine repeated runs: identical static behavior, median times."""
    first = receipts[0]
    if len(receipts) == 1:
        return first
    combined: dict[str, list[int]] = {}
    for name, (count, gas, _) in first.samples.items():
        times = sorted(r.samples[name][2] for r in receipts)
        combined[name] = [count, gas, times[len(times) // 2]]
    return TxReceipt(status=first.status, gas_used=first.gas_used,
                     return_data=first.return_data, samples=combined,
                     instructions=first.instructions)


def run_chain(spec: WorkloadSpec, num_blocks: int, schedule: GasSchedule,
              window_size: int = 500, clock=None, cache_capacity: int = 0,
              micro: bool = True, macro: bool = True,
              repetitions: int = 1,
              sink: Optional[SampleSink] = None) -> ChainRunReport:
    """Drive num_blocks synthetic blocks through the interpreter and trie."""
    if num_blocks < 1:
        raise ValueError("num_blocks must be >= 1")
    if window_size < 1:
        raise ValueError("window_size must be >= 1")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")

    if clock is None:
        clock = WallClock
    store = NodeStore(cache_capacity=cache_capacity, meter=clock.meter)
    trie = MerklePatriciaTrie(store=store)
    generator = WorkloadGenerator(spec, schedule)
    generator.write_genesis(trie)
    initial_keys = trie.key_count

    if sink is None:
        sink = SampleSink(0, micro_enabled=micro, macro_enabled=macro)
    receipts: list[ReceiptRow] = []

    # The cyclic collector's full passes scan the whole heap, which grows
    # with the node store; those pauses land inside instruction timings and
    # masquerade as height-dependent slowdown of every opcode. Block
    # execution allocates acyclically, so reference counting suffices for
    # the duration of the run.
    gc_was_enabled = gc.isenabled()
    gc.collect()
    gc.disable()
    try:
        _run_blocks(spec, num_blocks, schedule, window_size, clock,
                    trie, generator, sink, receipts, repetitions)
    finally:
        if gc_was_enabled:
            gc.enable()

    return ChainRunReport(
        windows=list(sink.archive),
        receipts=receipts,
        final_root=trie.root_hash(),
        initial_keys=initial_keys,
        final_keys=trie.key_count,
        num_blocks=num_blocks,
        window_size=window_size,
        clock_mode="virtual" if clock.meter is not None else "wall",
        spec=spec,
    )


def _run_blocks(spec, num_blocks, schedule, window_size, clock, trie,
                generator, sink, receipts, repetitions):
    for height in range(num_blocks):
        if height and height % window_size == 0:
            sink.close_window(height)

        block = generator.generate_block(height)
        parent_root = trie.root_hash()

        total_start = clock.now_ns()
        verify_start = clock.now_ns()
        verify_block(block, height, parent_root, schedule)
        if clock.meter is not None:
            clock.meter.span_overhead()
        sink.record_span(MacroCategory.VERIFY, clock.now_ns() - verify_start)
        block.parent_root = parent_root

        import_start = clock.now_ns()
        for tx_index, tx in enumerate(block.transactions):
            runs = []
            for probe in range(repetitions - 1):
                runs.append(execute_transaction(
                    tx.code, trie, tx.gas_limit, height, schedule,
                    clock=clock, commit=False))
            runs.append(execute_transaction(
                tx.code, trie, tx.gas_limit, height, schedule,
                clock=clock, sink=sink, commit=True))
            receipt = _median_receipt(runs)
            for name, (count, gas, time_ns) in receipt.samples.items():
                sink.record_instruction_totals(name, count, gas, time_ns)
            receipts.append(ReceiptRow(
                height, tx_index, receipt.status.value, receipt.gas_used,
                tx.gas_limit, receipt.instructions))

        finalize_start = clock.now_ns()
        if clock.meter is not None:
            clock.meter.commit()
        block.post_root = trie.root_hash()
        sink.record_span(MacroCategory.DB, clock.now_ns() - finalize_start)

        now = clock.now_ns()
        sink.record_span(MacroCategory.IMPORT, now - import_start)
        sink.record_span(MacroCategory.TOTAL, now - total_start)

    sink.close_window(num_blocks)

"""Stack-machine interpreter with per-instruction gas metering and timing.

Each transaction runs in its own executive: a `Machine` confined to one
thread, holding the program counter, a 256-bit word stack (max depth 1024),
byte-addressed memory, the remaining gas, and a storage view over the world
trie. Writes are buffered in the executive and land in the trie only when a
transaction succeeds.

Metering contract: the gas for an instruction is deducted before its effect
is applied. The timed region covers decode, the arity verification, dynamic
cost evaluation, the charge, and the effect; only the interpreter loop and
sample bookkeeping stay outside, so the summed instruction times track the
interpreter-level span closely. Exceptional halts (out of gas, invalid
opcode or jump target, stack faults) consume all remaining gas; samples
cover successful instructions only.

CALLCODE is implemented in a lite form: it pops a code id, loads the code
stored under that id in the world trie, and runs it in a child executive
that shares the caller's storage buffer and receives all remaining gas.
Its own sample covers code resolution and child setup; the child's
instructions are sampled individually, so no gas or time is double-counted.
A child that halts exceptionally fails the whole transaction (all gas was
forwarded, so nothing usable survives anyway); beyond the depth limit the
call is skipped and pushes failure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from ..clock import WallClock
from ..metrics import MacroCategory
from ..trie import MerklePatriciaTrie
from .opcodes import ARITY, Opcode
from .schedule import GasSchedule, SstoreRule, memory_expansion_cost

WORD_MASK = (1 << 256) - 1
STACK_LIMIT = 1024
CALL_DEPTH_LIMIT = 16

STORAGE_PREFIX = b"slot:"
CODE_PREFIX = b"code:"


class TxStatus(Enum):
    SUCCESS = "success"
    OUT_OF_GAS = "out-of-gas"
    INVALID_OP = "invalid-op"      # undefined opcode or bad jump target
    STACK_ERROR = "stack-error"


class IntrinsicGasError(ValueError):
    """Gas limit below the intrinsic transaction charge; not executed."""


_SLOT_KEY_CACHE: dict[int, bytes] = {}
_SLOT_KEY_CACHE_CAP = 1 << 17


def storage_key(slot: int) -> bytes:
    key = _SLOT_KEY_CACHE.get(slot)
    if key is None:
        if len(_SLOT_KEY_CACHE) >= _SLOT_KEY_CACHE_CAP:
            _SLOT_KEY_CACHE.clear()
        key = STORAGE_PREFIX + slot.to_bytes(32, "big")
        _SLOT_KEY_CACHE[slot] = key
    return key


def code_key(code_id: int) -> bytes:
    return CODE_PREFIX + code_id.to_bytes(32, "big")


def store_code(trie: MerklePatriciaTrie, code_id: int, code: bytes) -> None:
    trie.insert(code_key(code_id), code)


@dataclass
class TxReceipt:
    status: TxStatus
    gas_used: int
    return_data: bytes
    # opcode name -> [count, total gas, total time ns]
    samples: dict[str, list[int]]
    instructions: int

    @property
    def sample_gas_total(self) -> int:
        return sum(s[1] for s in self.samples.values())


class _SampleArrays:
    """Flat per-opcode-byte accumulators, shared by a call tree.

    Indexed list increments keep per-instruction bookkeeping cheap enough
    that the macro EVM span and the summed samples agree within a few
    percent on wall clocks.
    """

    __slots__ = ("counts", "gas", "times")

    def __init__(self) -> None:
        self.counts = [0] * 256
        self.gas = [0] * 256
        self.times = [0] * 256

    def to_dict(self) -> dict[str, list[int]]:
        return {Opcode(byte).name: [count, self.gas[byte], self.times[byte]]
                for byte, count in enumerate(self.counts) if count}


@dataclass
class InstructionSample:
    opcode: Opcode
    gas: int
    duration_ns: int


class _Halt(Exception):
    def __init__(self, status: TxStatus):
        self.status = status


class Machine:
    """One executive: volatile state plus a storage view over the trie."""

    def __init__(self, code: bytes, trie: MerklePatriciaTrie, gas: int,
                 block_height: int, schedule: GasSchedule,
                 clock=WallClock, storage_buffer: Optional[dict] = None,
                 depth: int = 0, sample_arrays: Optional[_SampleArrays] = None):
        self.code = code
        self.trie = trie
        self.gas = gas
        self.block_height = block_height
        self.schedule = schedule
        self.clock = clock
        self.depth = depth
        self.pc = 0
        self.stack: list[int] = []
        self.memory = bytearray()
        self.memory_words = 0
        self.storage_buffer: dict[int, int] = (
            storage_buffer if storage_buffer is not None else {})
        self.return_data = b""
        self.status: Optional[TxStatus] = None
        # shared across the whole call tree of one transaction
        self._samples = sample_arrays if sample_arrays is not None \
            else _SampleArrays()
        self._rules = schedule.rules_by_byte()
        self._last_byte = -1
        self._last_cost = 0
        self._last_duration = 0
        self.instructions = 0
        self.jumpdests = _scan_jumpdests(code)

    @property
    def samples(self) -> dict[str, list[int]]:
        return self._samples.to_dict()

    # -- storage view -----------------------------------------------------

    def storage_read(self, slot: int) -> int:
        if slot in self.storage_buffer:
            return self.storage_buffer[slot]
        raw = self.trie.get(storage_key(slot))
        return int.from_bytes(raw, "big") if raw else 0

    def storage_write(self, slot: int, value: int) -> None:
        self.storage_buffer[slot] = value

    # -- execution ----------------------------------------------------------

    def _step(self) -> None:
        """Hot path: execute one instruction, bookkeeping into the arrays."""
        pc = self.pc
        if pc >= len(self.code):
            self.status = TxStatus.SUCCESS  # running off the end stops
            return
        clock = self.clock
        try:
            start = clock.now_ns()
            byte = self.code[pc]
            arity = _ARITY_BY_BYTE[byte]
            if arity is None:
                raise _Halt(TxStatus.INVALID_OP)
            depth = len(self.stack)
            if depth < arity[0] or depth - arity[0] + arity[1] > STACK_LIMIT:
                raise _Halt(TxStatus.STACK_ERROR)
            rule = self._rules[byte]
            cost = rule if type(rule) is int else self._dynamic_cost(byte, rule)
            if cost > self.gas:
                raise _Halt(TxStatus.OUT_OF_GAS)
            self.gas -= cost
            if clock.meter is not None:
                clock.meter.instruction()
            self.pc = pc + 1
            child = _DISPATCH[byte](self)
            duration = clock.now_ns() - start
        except _Halt as halt:
            self._halt(halt.status)
            return

        self.instructions += 1
        arrays = self._samples
        arrays.counts[byte] += 1
        arrays.gas[byte] += cost
        arrays.times[byte] += duration
        self._last_byte = byte
        self._last_cost = cost
        self._last_duration = duration

        if child is not None:
            self._run_child(child)

    def step(self) -> Optional[InstructionSample]:
        """Execute one instruction; returns its sample, or None on halt."""
        self._last_byte = -1
        self._step()
        if self._last_byte < 0:
            return None
        return InstructionSample(Opcode(self._last_byte), self._last_cost,
                                 self._last_duration)

    def run(self) -> TxStatus:
        step = self._step
        while self.status is None:
            step()
        return self.status

    def _halt(self, status: TxStatus) -> None:
        self.status = status
        self.gas = 0  # exceptional halts consume the remaining gas
        return None

    # -- gas ---------------------------------------------------------------

    def _dynamic_cost(self, byte: int, rule) -> int:
        if isinstance(rule, SstoreRule):
            slot, value = self.stack[-1], self.stack[-2]
            current = self.storage_read(slot)
            return rule.set_cost if current == 0 and value != 0 else rule.reset_cost
        cost = rule.base_cost(self.block_height)
        if rule.plus_memory:
            offset = self.stack[-1]
            size = 32 if byte in (Opcode.MLOAD, Opcode.MSTORE) \
                else self.stack[-2]
            cost += self._memory_expansion(offset, size)
        return cost

    def _memory_expansion(self, offset: int, size: int) -> int:
        if size == 0:
            return 0
        if offset + size > 2 ** 32:   # desk-scale sanity bound
            raise _Halt(TxStatus.OUT_OF_GAS)
        new_words = (offset + size + 31) // 32
        delta = memory_expansion_cost(self.memory_words, new_words)
        if delta and self.clock.meter is not None:
            self.clock.meter.memory_words(new_words - self.memory_words)
        return delta

    def _grow_memory(self, offset: int, size: int) -> None:
        end = offset + size
        if end > len(self.memory):
            new_words = (end + 31) // 32
            self.memory.extend(bytes(new_words * 32 - len(self.memory)))
            self.memory_words = new_words

    # -- CALLCODE-lite -------------------------------------------------------

    def _spawn_child(self, code_id: int) -> Optional["Machine"]:
        if self.depth + 1 >= CALL_DEPTH_LIMIT:
            self.stack.append(0)
            return None
        code = self.trie.get(code_key(code_id))
        if code is None:
            self.stack.append(0)
            return None
        return Machine(code, self.trie, self.gas, self.block_height,
                       self.schedule, clock=self.clock,
                       storage_buffer=self.storage_buffer,
                       depth=self.depth + 1, sample_arrays=self._samples)

    def _run_child(self, child: "Machine") -> None:
        status = child.run()  # child samples land in the shared arrays
        self.gas = child.gas
        self.instructions += child.instructions
        if status is not TxStatus.SUCCESS:
            self.status = status
            self.gas = 0
        else:
            self.stack.append(1)


def _scan_jumpdests(code: bytes) -> frozenset[int]:
    """Positions of JUMPDEST bytes that are not inside PUSH immediates."""
    dests = set()
    i = 0
    while i < len(code):
        byte = code[i]
        if byte == Opcode.JUMPDEST:
            dests.add(i)
        if Opcode.PUSH1 <= byte <= Opcode.PUSH32:
            i += byte - Opcode.PUSH1 + 1
        i += 1
    return frozenset(dests)


# ---------------------------------------------------------------------------
# instruction effects, dispatched by opcode byte
#
# Handlers run with pc already advanced past the opcode byte. The first
# operand popped is the top of stack. Only CALLCODE returns a value (the
# child executive).
# ---------------------------------------------------------------------------

def _op_stop(m: Machine):
    m.status = TxStatus.SUCCESS


def _op_add(m: Machine):
    s = m.stack
    a, b = s.pop(), s.pop()
    s.append((a + b) & WORD_MASK)


def _op_mul(m: Machine):
    s = m.stack
    a, b = s.pop(), s.pop()
    s.append((a * b) & WORD_MASK)


def _op_sub(m: Machine):
    s = m.stack
    a, b = s.pop(), s.pop()
    s.append((a - b) & WORD_MASK)


def _op_div(m: Machine):
    s = m.stack
    a, b = s.pop(), s.pop()
    s.append(a // b if b else 0)


def _op_lt(m: Machine):
    s = m.stack
    a, b = s.pop(), s.pop()
    s.append(1 if a < b else 0)


def _op_gt(m: Machine):
    s = m.stack
    a, b = s.pop(), s.pop()
    s.append(1 if a > b else 0)


def _op_eq(m: Machine):
    s = m.stack
    a, b = s.pop(), s.pop()
    s.append(1 if a == b else 0)


def _op_iszero(m: Machine):
    s = m.stack
    s.append(1 if s.pop() == 0 else 0)


def _op_and(m: Machine):
    s = m.stack
    a, b = s.pop(), s.pop()
    s.append(a & b)


def _op_or(m: Machine):
    s = m.stack
    a, b = s.pop(), s.pop()
    s.append(a | b)


def _op_xor(m: Machine):
    s = m.stack
    a, b = s.pop(), s.pop()
    s.append(a ^ b)


def _op_not(m: Machine):
    s = m.stack
    s.append(s.pop() ^ WORD_MASK)


def _op_pop(m: Machine):
    m.stack.pop()


def _op_pc(m: Machine):
    m.stack.append(m.pc - 1)


def _op_jumpdest(m: Machine):
    pass


def _op_jump(m: Machine):
    dest = m.stack.pop()
    if dest not in m.jumpdests:
        raise _Halt(TxStatus.INVALID_OP)
    m.pc = dest


def _op_jumpi(m: Machine):
    s = m.stack
    dest, cond = s.pop(), s.pop()
    if cond:
        if dest not in m.jumpdests:
            raise _Halt(TxStatus.INVALID_OP)
        m.pc = dest


def _op_mload(m: Machine):
    offset = m.stack.pop()
    m._grow_memory(offset, 32)
    m.stack.append(int.from_bytes(m.memory[offset:offset + 32], "big"))


def _op_mstore(m: Machine):
    s = m.stack
    offset, value = s.pop(), s.pop()
    m._grow_memory(offset, 32)
    m.memory[offset:offset + 32] = value.to_bytes(32, "big")


def _op_sload(m: Machine):
    s = m.stack
    s.append(m.storage_read(s.pop()))


def _op_sstore(m: Machine):
    s = m.stack
    slot, value = s.pop(), s.pop()
    m.storage_write(slot, value)


def _op_return(m: Machine):
    s = m.stack
    offset, size = s.pop(), s.pop()
    m._grow_memory(offset, size)
    m.return_data = bytes(m.memory[offset:offset + size])
    m.status = TxStatus.SUCCESS


def _op_callcode(m: Machine):
    return m._spawn_child(m.stack.pop())


def _make_push(width: int):
    def _op_push(m: Machine):
        pc = m.pc
        raw = m.code[pc:pc + width]
        if len(raw) < width:
            raw = raw.ljust(width, b"\x00")  # immediates truncated by EOF
        m.stack.append(int.from_bytes(raw, "big"))
        m.pc = pc + width
    return _op_push


def _make_dup(k: int):
    def _op_dup(m: Machine):
        m.stack.append(m.stack[-k])
    return _op_dup


def _make_swap(k: int):
    def _op_swap(m: Machine):
        s = m.stack
        s[-1], s[-k - 1] = s[-k - 1], s[-1]
    return _op_swap


def _build_dispatch():
    table = [None] * 256
    table[Opcode.STOP] = _op_stop
    table[Opcode.ADD] = _op_add
    table[Opcode.MUL] = _op_mul
    table[Opcode.SUB] = _op_sub
    table[Opcode.DIV] = _op_div
    table[Opcode.LT] = _op_lt
    table[Opcode.GT] = _op_gt
    table[Opcode.EQ] = _op_eq
    table[Opcode.ISZERO] = _op_iszero
    table[Opcode.AND] = _op_and
    table[Opcode.OR] = _op_or
    table[Opcode.XOR] = _op_xor
    table[Opcode.NOT] = _op_not
    table[Opcode.POP] = _op_pop
    table[Opcode.PC] = _op_pc
    table[Opcode.JUMPDEST] = _op_jumpdest
    table[Opcode.JUMP] = _op_jump
    table[Opcode.JUMPI] = _op_jumpi
    table[Opcode.MLOAD] = _op_mload
    table[Opcode.MSTORE] = _op_mstore
    table[Opcode.SLOAD] = _op_sload
    table[Opcode.SSTORE] = _op_sstore
    table[Opcode.RETURN] = _op_return
    table[Opcode.CALLCODE] = _op_callcode
    for width in range(1, 33):
        table[Opcode.PUSH1 + width - 1] = _make_push(width)
    for k in range(1, 17):
        table[Opcode.DUP1 + k - 1] = _make_dup(k)
        table[Opcode.SWAP1 + k - 1] = _make_swap(k)
    return table


_DISPATCH = _build_dispatch()

_ARITY_BY_BYTE: list = [None] * 256
for _op, _io in ARITY.items():
    _ARITY_BY_BYTE[_op.value] = _io


def execute_transaction(code: bytes, trie: MerklePatriciaTrie, gas_limit: int,
                        block_height: int, schedule: GasSchedule,
                        clock=WallClock, sink=None,
                        commit: bool = True) -> TxReceipt:
    """Run one transaction against the world trie.

    Charges the intrinsic gas first (a limit below it is rejected without
    execution), then interprets the code. Storage writes are buffered and
    committed to the trie only on success. When a sink is given, the
    execution is recorded as TX/EVM spans and the commit as a DB span; the
    per-opcode samples (which exclude the intrinsic charge) travel on the
    receipt, and the chain driver decides how to sink them.
    """
    if gas_limit < schedule.intrinsic_gas:
        raise IntrinsicGasError(
            f"gas limit {gas_limit} below intrinsic {schedule.intrinsic_gas}")

    tx_start = clock.now_ns()
    machine = Machine(code, trie, gas_limit - schedule.intrinsic_gas,
                      block_height, schedule, clock=clock)
    evm_start = clock.now_ns()
    status = machine.run()
    evm_duration = clock.now_ns() - evm_start
    if sink is not None:
        sink.record_span(MacroCategory.EVM, evm_duration)
        sink.record_span(MacroCategory.TX, clock.now_ns() - tx_start)

    if status is TxStatus.SUCCESS and commit:
        meter = clock.meter
        db_start = clock.now_ns()
        if meter is not None:
            meter.commit()
        for slot in sorted(machine.storage_buffer):
            value = machine.storage_buffer[slot]
            if value == 0:
                trie.delete(storage_key(slot))
            else:
                width = (value.bit_length() + 7) // 8
                trie.insert(storage_key(slot), value.to_bytes(width, "big"))
        if sink is not None:
            sink.record_span(MacroCategory.DB, clock.now_ns() - db_start)

    gas_used = gas_limit - machine.gas
    return TxReceipt(status=status, gas_used=gas_used,
                     return_data=machine.return_data,
                     samples=machine.samples,
                     instructions=machine.instructions)

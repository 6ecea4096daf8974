"""Analytical and cycle-level model of the decoder hardware.

One decoding step is split into ``stages`` groups of check nodes processed
in parallel.  Edge and channel messages live in banks of small RAMs whose
depth equals the stage count (rounded up to a power of two for physical
RAM blocks) and whose width is the quantization width times the processor
count, because the homogeneous pipeline lets all processors share one
address sequence and be stacked into the word width.  The model reproduces
RAM counts, memory-bit totals, cycle schedules for single- and
multi-codeword operation, and information throughput.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

__all__ = [
    "ArchParams",
    "ArchReport",
    "ComplexityScores",
    "RamAccess",
    "StageEvent",
    "Schedule",
    "RamTrace",
    "derive_report",
    "complexity_estimates",
    "schedule_single",
    "schedule_multi",
    "schedule_conventional",
    "proposed_conventional_ratio",
    "ram_trace_example",
    "PRESETS",
    "FPGA_REFERENCE",
]

PROPOSED_PHASES = ("S-W", "R", "CNP", "VNP")
CONVENTIONAL_PHASES = ("S", "CNR", "CNP", "CNW", "VNR", "VNP", "VNW")


class ArchModelError(ValueError):
    """Parameter combination the hardware model cannot realize."""


@dataclass(frozen=True)
class ArchParams:
    """Hardware-model parameters for one decoder configuration."""

    z: int
    block_rows: int            # check blocks of the base grid
    block_cols: int            # variable blocks of the base grid
    stages: int                # groups per decoding step
    processors: int            # pipeline depth = decoding iterations
    quant_bits: int = 4
    clock_hz: float = 1.0e8
    stage_delay: int = 0       # extra pipeline cycles per decoding step
    codewords: int = 1

    def __post_init__(self):
        period = math.gcd(self.block_rows, self.block_cols)
        if period < 2:
            raise ArchModelError("block_rows/block_cols give a degenerate period")
        for name in ("z", "block_rows", "block_cols", "stages", "processors",
                     "quant_bits", "codewords"):
            if getattr(self, name) < 1:
                raise ArchModelError(f"{name} must be positive")
        if self.stage_delay < 0:
            raise ArchModelError("stage_delay must be >= 0")
        if self.clock_hz <= 0:
            raise ArchModelError("clock_hz must be positive")
        if not 1 <= self.codewords <= period:
            raise ArchModelError(
                f"codewords must be in [1, {period}], got {self.codewords}"
            )
        if self.checks_per_block % self.stages != 0:
            raise ArchModelError(
                f"stages={self.stages} does not divide the "
                f"{self.checks_per_block} checks per block"
            )
        edge = self.z * self.block_rows * self.block_cols
        if edge % (self.period ** 2 * self.stages) != 0:
            raise ArchModelError(
                f"stages={self.stages} does not split the edge RAMs evenly"
            )
        chan = self.z * self.block_cols
        if chan % (self.block_rows * self.stages) != 0:
            raise ArchModelError(
                f"stages={self.stages} does not split the channel RAMs evenly"
            )

    @property
    def period(self) -> int:
        return math.gcd(self.block_rows, self.block_cols)

    @property
    def memory(self) -> int:
        return self.period - 1

    @property
    def checks_per_block(self) -> int:
        return self.z * self.block_rows // self.period

    @property
    def block_len(self) -> int:
        return self.z * self.block_cols // self.period

    @property
    def rate(self) -> float:
        return 1.0 - self.block_rows / self.block_cols


@dataclass(frozen=True)
class ArchReport:
    params: ArchParams
    cnp_count: int
    vnp_count: int
    edge_rams: int
    channel_rams: int
    ram_depth: int
    ram_width: int
    memory_bits: int
    cycles_per_step: int
    throughput_bps: float


def _pow2_at_least(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def derive_report(p: ArchParams) -> ArchReport:
    """RAM allocation, memory bits, and throughput for one configuration.

    Physical RAM depth is the stage count rounded up to a power of two.
    Memory bits count the combined RAMs (width = quantization bits times
    processors) once per interleaved codeword; throughput counts
    information bits per decoding step over the cycles one step occupies.
    """
    cnp = p.checks_per_block // p.stages
    vnp = p.block_len * p.checks_per_block // (p.stages * p.z)
    edge_rams = p.z * p.block_rows * p.block_cols // p.stages
    channel_rams = p.z * p.block_cols * p.period // (p.block_rows * p.stages)
    depth = _pow2_at_least(p.stages)
    width = p.quant_bits * p.processors
    bits = (edge_rams + channel_rams) * depth * width * p.codewords
    cycles = p.stages + p.stage_delay
    info_bits_per_step = (p.block_cols - p.block_rows) * p.z / p.period
    throughput = p.codewords * info_bits_per_step * p.clock_hz / cycles
    return ArchReport(
        params=p,
        cnp_count=cnp,
        vnp_count=vnp,
        edge_rams=edge_rams,
        channel_rams=channel_rams,
        ram_depth=depth,
        ram_width=width,
        memory_bits=bits,
        cycles_per_step=cycles,
        throughput_bps=throughput,
    )


@dataclass(frozen=True)
class ComplexityScores:
    """Relative scaling scores for parameter sweeps (no absolute units)."""

    throughput_score: float    # ~ z * rate / stages
    memory_score: float        # ~ z * processors * block_cols^2 * (1 - rate)
    logic_score: float         # memory_score / stages

    def as_dict(self) -> dict:
        return {
            "throughput_score": self.throughput_score,
            "memory_score": self.memory_score,
            "logic_score": self.logic_score,
        }


def complexity_estimates(p: ArchParams) -> ComplexityScores:
    mem = p.z * p.processors * p.block_cols ** 2 * (1.0 - p.rate)
    return ComplexityScores(
        throughput_score=p.z * p.rate / p.stages,
        memory_score=mem,
        logic_score=mem / p.stages,
    )


# ---------------------------------------------------------------------------
# RAM layout shared by the schedules and the storage trace


class _RamMap:
    """Integer ids for the per-codeword edge and channel RAM banks.

    Edge RAMs are grouped by block-row phase, then by the phase of the
    variable block the edges touch; channel RAMs are grouped by
    variable-block phase.  Ids are 1-based to match bank labels.
    """

    def __init__(self, p: ArchParams):
        self.period = p.period
        self.edge_per_pair = p.z * p.block_rows * p.block_cols // (
            p.period ** 2 * p.stages
        )
        self.edge_per_row = self.edge_per_pair * p.period
        self.edge_total = self.edge_per_row * p.period
        self.chan_per_block = p.z * p.block_cols // (p.block_rows * p.stages)
        self.chan_total = self.chan_per_block * p.period
        self.per_codeword = self.edge_total + self.chan_total

    def edge(self, codeword: int, phase: int, delta: int, k: int) -> int:
        block_phase = (phase - delta) % self.period
        return (
            codeword * self.per_codeword
            + phase * self.edge_per_row
            + block_phase * self.edge_per_pair
            + k
            + 1
        )

    def edge_bank(self, codeword: int, phase: int, delta: int) -> range:
        lo = self.edge(codeword, phase, delta, 0)
        return range(lo, lo + self.edge_per_pair)

    def channel_bank(self, codeword: int, phase: int) -> range:
        lo = (
            codeword * self.per_codeword
            + self.edge_total
            + phase * self.chan_per_block
            + 1
        )
        return range(lo, lo + self.chan_per_block)


@dataclass(frozen=True)
class RamAccess:
    ram: int
    address: int
    op: str  # "R" or "W"


@dataclass(frozen=True)
class StageEvent:
    cycle: int
    step: int
    stage: int
    codeword: int
    bpu: int
    phases: tuple[str, ...]
    accesses: tuple[RamAccess, ...]


@dataclass(frozen=True)
class Schedule:
    params: ArchParams
    kind: str                  # "proposed" or "conventional"
    events: tuple[StageEvent, ...]
    cycles_per_step: int
    group_span: int            # phase slots needed to decode one check group

    def audit_collisions(self) -> list[str]:
        """Port conflicts: a RAM read or written twice in one stage slot."""
        conflicts = []
        seen: dict = {}
        for ev in self.events:
            for acc in ev.accesses:
                key = (ev.cycle, acc.ram, acc.op)
                if key in seen:
                    conflicts.append(
                        f"cycle {ev.cycle}: RAM {acc.ram} {acc.op} by BPU "
                        f"{seen[key]} and BPU {ev.bpu}"
                    )
                else:
                    seen[key] = ev.bpu
        return conflicts

    def bpu_busy_fraction(self) -> dict[int, float]:
        """Fraction of occupied cycles during which each BPU is active."""
        cycles = {ev.cycle for ev in self.events}
        per_bpu: dict[int, set] = {}
        for ev in self.events:
            per_bpu.setdefault(ev.bpu, set()).add(ev.cycle)
        span = max(cycles) + 1 if cycles else 0
        return {b: len(c) / span for b, c in sorted(per_bpu.items())}

    def steps_per_cycle(self) -> float:
        """Aggregate decoding-step completion rate over the emitted window."""
        if not self.events:
            return 0.0
        span = max(ev.cycle for ev in self.events) + 1
        steps = len({(ev.codeword, ev.step) for ev in self.events})
        return steps / span

    def csv_rows(self):
        rows = []
        for ev in self.events:
            label = "+".join(ev.phases)
            if ev.accesses:
                for acc in ev.accesses:
                    rows.append((ev.cycle, ev.bpu, acc.op, acc.ram, acc.address))
            rows.append((ev.cycle, ev.bpu, label, "", ""))
        return rows

    def gantt(self) -> str:
        """Cycle-by-BPU activity grid."""
        if not self.events:
            return "(empty schedule)"
        n_cycles = max(ev.cycle for ev in self.events) + 1
        bpus = sorted({ev.bpu for ev in self.events})
        grid = {(ev.bpu, ev.cycle): f"c{ev.codeword}s{ev.stage}" for ev in self.events}
        width = max(6, max(len(v) for v in grid.values()) + 1)
        head = "cycle".ljust(8) + "".join(f"BPU{b}".ljust(width) for b in bpus)
        lines = [head]
        for cy in range(n_cycles):
            row = f"{cy}".ljust(8)
            for b in bpus:
                row += grid.get((b, cy), ".").ljust(width)
            lines.append(row)
        return "\n".join(lines)


def _stage_accesses(p: ArchParams, rams: _RamMap, codeword: int, phase: int,
                    stage: int) -> tuple[RamAccess, ...]:
    """RAM traffic of one stage while the row of the given phase is processed.

    Reads: the entering row's full bank (check update), the stored
    check-to-variable banks of the leaving block, and the leaving block's
    channel bank.  Writes: check-to-variable write-back for blocks that
    stay, the arriving block's variable-to-check messages into the banks
    freed this stage, and the arriving channel values.
    """
    M = p.period
    acc: list[RamAccess] = []
    for delta in range(M):
        for ram in rams.edge_bank(codeword, phase, delta):
            acc.append(RamAccess(ram, stage, "R"))
    for j in range(M - 1):  # stored check-to-variable values of the leaving block
        ph = (phase + 1 + j) % M
        for ram in rams.edge_bank(codeword, ph, j):
            acc.append(RamAccess(ram, stage, "R"))
    for ram in rams.channel_bank(codeword, (phase + 1) % M):
        acc.append(RamAccess(ram, stage, "R"))
    for delta in range(M - 1):  # write-back toward blocks that stay resident
        for ram in rams.edge_bank(codeword, phase, delta):
            acc.append(RamAccess(ram, stage, "W"))
    for j in range(M):  # arriving block's messages land in the freed slots
        ph = (phase + 1 + j) % M
        for ram in rams.edge_bank(codeword, ph, j):
            acc.append(RamAccess(ram, stage, "W"))
    for ram in rams.channel_bank(codeword, (phase + 1) % M):
        acc.append(RamAccess(ram, stage, "W"))
    return tuple(acc)


def _emit(p: ArchParams, kind: str, phases: tuple[str, ...], steps: int) -> Schedule:
    rams = _RamMap(p)
    cycles_per_step = p.stages + p.stage_delay
    events = []
    for cw in range(p.codewords):
        for step in range(steps):
            phase = step % p.period
            bpu = phase if p.codewords == 1 else cw
            start = step * cycles_per_step
            for stage in range(p.stages):
                events.append(
                    StageEvent(
                        cycle=start + stage,
                        step=step,
                        stage=stage,
                        codeword=cw,
                        bpu=bpu,
                        phases=phases,
                        accesses=_stage_accesses(p, rams, cw, phase, stage),
                    )
                )
    events.sort(key=lambda ev: (ev.cycle, ev.bpu))
    return Schedule(
        params=p,
        kind=kind,
        events=tuple(events),
        cycles_per_step=cycles_per_step,
        group_span=len(phases),
    )


def schedule_single(p: ArchParams, steps: int | None = None) -> Schedule:
    """Proposed schedule for one codeword: one BPU active per decoding step."""
    single = replace(p, codewords=1)
    if steps is None:
        steps = 2 * single.period
    return _emit(single, "proposed", PROPOSED_PHASES, steps)


def schedule_multi(p: ArchParams, steps: int | None = None) -> Schedule:
    """Proposed schedule with up to ``period`` interleaved codewords.

    Each codeword owns one BPU and its own RAM banks; with a full set of
    codewords every BPU is busy every step and throughput scales by the
    codeword count.
    """
    if steps is None:
        steps = 2 * p.period
    return _emit(p, "proposed", PROPOSED_PHASES, steps)


def schedule_conventional(p: ArchParams, steps: int | None = None) -> Schedule:
    """Baseline schedule that runs read, update, and write as separate phases."""
    single = replace(p, codewords=1)
    if steps is None:
        steps = 2 * single.period
    return _emit(single, "conventional", CONVENTIONAL_PHASES, steps)


def proposed_conventional_ratio(p: ArchParams) -> Fraction:
    """Time to decode one check group, proposed over conventional."""
    a = schedule_single(p, steps=1)
    b = schedule_conventional(p, steps=1)
    return Fraction(a.group_span, b.group_span)


# ---------------------------------------------------------------------------
# storage walkthrough


@dataclass(frozen=True)
class RamTrace:
    """Per-stage snapshots of which message kind sits in each RAM entry."""

    params: ArchParams
    edge_rams: int
    channel_rams: int
    edge_rams_per_row: int
    channel_rams_per_block: int
    snapshots: tuple[tuple[str, tuple[tuple[int, int, str], ...]], ...]

    def render(self) -> str:
        lines = [
            f"edge RAMs 1..{self.edge_rams} "
            f"({self.edge_rams_per_row} per check-node set), "
            f"channel RAMs {self.edge_rams + 1}..{self.edge_rams + self.channel_rams} "
            f"({self.channel_rams_per_block} per variable-block set), "
            f"depth {self.params.stages}",
        ]
        for label, cells in self.snapshots:
            lines.append("")
            lines.append(label)
            by_ram: dict[int, dict[int, str]] = {}
            for ram, addr, tag in cells:
                by_ram.setdefault(ram, {})[addr] = tag
            for ram in sorted(by_ram):
                entry = by_ram[ram]
                parts = [f"addr {a}: {entry[a]}" for a in sorted(entry)]
                lines.append(f"  RAM {ram:2d}  " + " | ".join(parts))
        return "\n".join(lines) + "\n"


def _t_label(offset: int) -> str:
    if offset == 0:
        return "t0"
    return f"t0{offset:+d}"


def ram_trace_example() -> RamTrace:
    """Storage walkthrough for the fixed example z=4, 2x4 grid, 2 stages.

    Shows how check-to-variable and variable-to-check messages alternate in
    the same RAM entries over one period of decoding steps, with the read
    and write address simply incrementing by one per stage.
    """
    p = ArchParams(z=4, block_rows=2, block_cols=4, stages=2, processors=1)
    rams = _RamMap(p)
    M = p.period
    G = p.stages

    state: dict[tuple[int, int], str] = {}

    def set_bank(bank, addr, tag):
        for ram in bank:
            state[(ram, addr)] = tag

    def v2c(src_off, dst_off):
        return f"v2c v[{_t_label(src_off)}]->u[{_t_label(dst_off)}]"

    def c2v(src_off, dst_off):
        return f"c2v u[{_t_label(src_off)}]->v[{_t_label(dst_off)}]"

    def lam(off):
        return f"ch v[{_t_label(off)}]"

    # state at the start of the step processing u[t0] / v[t0-1]:
    # the entering row's banks hold only variable-to-check messages
    for addr in range(G):
        set_bank(rams.edge_bank(0, 0, 0), addr, v2c(0, 0))
        set_bank(rams.edge_bank(0, 0, 1), addr, v2c(-1, 0))
        set_bank(rams.edge_bank(0, 1, 1), addr, v2c(0, +1))
        set_bank(rams.edge_bank(0, 1, 0), addr, c2v(-1, -1))
        set_bank(rams.channel_bank(0, 0), addr, lam(0))
        set_bank(rams.channel_bank(0, 1), addr, lam(-1))

    snapshots = [
        (
            "step 1: start of BPU_1 processing u[t0], v[t0-1]",
            tuple((r, a, t) for (r, a), t in sorted(state.items())),
        )
    ]

    def run_stage(step: int, stage: int):
        t = step  # row u[t0 + step] enters at this decoding step
        phase = t % M
        # write-back of fresh check-to-variable values toward blocks that stay
        for delta in range(M - 1):
            set_bank(rams.edge_bank(0, phase, delta), stage, c2v(t, t - delta))
        # arriving block v[t0 + step + 1] refills the slots freed this stage
        for j in range(M):
            ph = (phase + 1 + j) % M
            set_bank(rams.edge_bank(0, ph, j), stage, v2c(t + 1, t + 1 + j))
        set_bank(rams.channel_bank(0, (phase + 1) % M), stage, lam(t + 1))

    run_stage(0, 0)
    snapshots.append(
        (
            "step 2: after stage 1 of BPU_1 (addresses 0 written)",
            tuple((r, a, t) for (r, a), t in sorted(state.items())),
        )
    )
    run_stage(0, 1)
    snapshots.append(
        (
            "step 3: after stage 2 of BPU_1 (addresses 1 written)",
            tuple((r, a, t) for (r, a), t in sorted(state.items())),
        )
    )
    run_stage(1, 0)
    run_stage(1, 1)
    snapshots.append(
        (
            "after BPU_2: RAM 1-8 hold variable-to-check messages for u[t0+2]",
            tuple((r, a, t) for (r, a), t in sorted(state.items())),
        )
    )
    return RamTrace(
        params=p,
        edge_rams=rams.edge_total,
        channel_rams=rams.chan_total,
        edge_rams_per_row=rams.edge_per_row,
        channel_rams_per_block=rams.chan_per_block,
        snapshots=tuple(snapshots),
    )


# ---------------------------------------------------------------------------
# built-in configurations


def _preset(z: int, processors: int, codewords: int) -> ArchParams:
    return ArchParams(
        z=z,
        block_rows=4,
        block_cols=24,
        stages=z,
        processors=processors,
        quant_bits=4,
        clock_hz=1.0e8,
        stage_delay=0,
        codewords=codewords,
    )


PRESETS: dict[str, ArchParams] = {
    "1-S": _preset(422, 18, 1),
    "2-S": _preset(512, 18, 1),
    "3-S": _preset(1024, 12, 1),
    "4-S": _preset(1024, 10, 1),
    "1-P": _preset(422, 18, 4),
    "2-P": _preset(512, 18, 4),
    "3-P": _preset(1024, 12, 4),
    "4-P": _preset(1024, 10, 4),
}

# figures measured on the reference FPGA implementation of each preset,
# used to sanity-check the model (memory bits within a couple of percent)
FPGA_REFERENCE: dict[str, dict] = {
    "1-S": {"memory_bits": 4402268, "throughput_bps": 0.5e9},
    "2-S": {"memory_bits": 4402268, "throughput_bps": 0.5e9},
    "3-S": {"memory_bits": 5829352, "throughput_bps": 0.5e9},
    "4-S": {"memory_bits": 4844140, "throughput_bps": 0.5e9},
    "1-P": {"memory_bits": 17558528, "throughput_bps": 2.0e9},
    "2-P": {"memory_bits": 17558528, "throughput_bps": 2.0e9},
    "3-P": {"memory_bits": 23283712, "throughput_bps": 2.0e9},
    "4-P": {"memory_bits": 19348480, "throughput_bps": 2.0e9},
}

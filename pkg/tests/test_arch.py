import math
from fractions import Fraction
from pathlib import Path

import pytest

from ldpccc.arch import (
    ArchModelError,
    ArchParams,
    FPGA_REFERENCE,
    PRESETS,
    complexity_estimates,
    derive_report,
    proposed_conventional_ratio,
    ram_trace_example,
    schedule_conventional,
    schedule_multi,
    schedule_single,
)

GOLDEN = Path(__file__).parent / "data" / "ram_trace_golden.txt"


def params_2s(**kw):
    base = dict(
        z=512, block_rows=4, block_cols=24, stages=512, processors=18,
        quant_bits=4, clock_hz=1e8, stage_delay=0, codewords=1,
    )
    base.update(kw)
    return ArchParams(**base)


# ---------------------------------------------------------------------------
# parameter validation


def test_params_reject_bad_stage_split():
    with pytest.raises(ArchModelError, match="stages"):
        params_2s(stages=511)  # does not divide 512 checks per block


def test_params_reject_codeword_overflow():
    with pytest.raises(ArchModelError, match="codewords"):
        params_2s(codewords=5)


def test_params_reject_degenerate_grid():
    with pytest.raises(ArchModelError, match="period"):
        ArchParams(z=8, block_rows=3, block_cols=8, stages=1, processors=2)


# ---------------------------------------------------------------------------
# derive_report


def test_report_counts_for_reference_configuration():
    rep = derive_report(params_2s())
    assert rep.cnp_count == 1
    assert rep.vnp_count == 6
    assert rep.edge_rams == 96
    assert rep.channel_rams == 24
    assert rep.ram_depth == 512
    assert rep.ram_width == 4 * 18
    assert rep.cycles_per_step == 512


def test_report_throughput_single_and_multi():
    rep = derive_report(params_2s())
    assert rep.throughput_bps == pytest.approx(0.5e9)
    rep4 = derive_report(params_2s(codewords=4))
    assert rep4.throughput_bps == pytest.approx(2.0e9)


def test_report_memory_formula():
    # (96 + 24) RAMs * depth 512 * width 4*18 = 4,423,680 bits
    rep = derive_report(params_2s())
    assert rep.memory_bits == 4_423_680


def test_report_depth_rounds_to_power_of_two():
    rep = derive_report(params_2s(z=422, stages=422))
    assert rep.ram_depth == 512
    assert rep.memory_bits == 4_423_680  # same physical RAMs as stages=512


def test_report_stage_delay_lowers_throughput():
    rep = derive_report(params_2s(stage_delay=64))
    assert rep.cycles_per_step == 576
    assert rep.throughput_bps == pytest.approx(0.5e9 * 512 / 576)


def test_all_presets_match_reference_hardware():
    for name, params in PRESETS.items():
        rep = derive_report(params)
        ref = FPGA_REFERENCE[name]
        assert rep.throughput_bps == pytest.approx(ref["throughput_bps"])
        assert abs(rep.memory_bits / ref["memory_bits"] - 1.0) < 0.02


def test_throughput_monotonicity():
    base = derive_report(params_2s()).throughput_bps
    assert derive_report(params_2s(stages=256)).throughput_bps > base  # fewer stages
    assert derive_report(params_2s(z=1024, stages=1024)).throughput_bps == pytest.approx(base)
    assert derive_report(params_2s(clock_hz=2e8)).throughput_bps == pytest.approx(2 * base)


# ---------------------------------------------------------------------------
# complexity scores


def test_complexity_linear_in_z():
    a = complexity_estimates(params_2s())
    b = complexity_estimates(params_2s(z=1024, stages=512))
    assert b.throughput_score == pytest.approx(2 * a.throughput_score)
    assert b.memory_score == pytest.approx(2 * a.memory_score)
    assert b.logic_score == pytest.approx(2 * a.logic_score)


def test_complexity_stage_scaling():
    a = complexity_estimates(params_2s())
    b = complexity_estimates(params_2s(stages=256))
    assert b.throughput_score == pytest.approx(2 * a.throughput_score)
    assert b.logic_score == pytest.approx(2 * a.logic_score)
    assert b.memory_score == pytest.approx(a.memory_score)


def test_complexity_orders_like_reference_logic_usage():
    # reference combinational usage: config 1-S (106288) above 3-S (73066)
    s1 = complexity_estimates(PRESETS["1-S"])
    s3 = complexity_estimates(PRESETS["3-S"])
    assert s1.logic_score > s3.logic_score


# ---------------------------------------------------------------------------
# schedules


def sched_params(**kw):
    base = dict(z=12, block_rows=4, block_cols=8, stages=3, processors=2)
    base.update(kw)
    return ArchParams(**base)


def test_group_time_ratio_is_four_sevenths():
    p = sched_params()  # period 4, stages 3
    assert p.period == 4 and p.stages == 3
    assert proposed_conventional_ratio(p) == Fraction(4, 7)
    a = schedule_single(p, steps=1)
    b = schedule_conventional(p, steps=1)
    assert Fraction(a.group_span, b.group_span) == Fraction(4, 7)


def test_single_codeword_duty_cycle():
    p = sched_params()
    s = schedule_single(p, steps=2 * p.period)
    duty = s.bpu_busy_fraction()
    assert len(duty) == p.period
    for frac in duty.values():
        assert frac == pytest.approx(1.0 / p.period)


def test_single_codeword_one_bpu_at_a_time():
    s = schedule_single(sched_params(), steps=8)
    by_cycle = {}
    for ev in s.events:
        by_cycle.setdefault(ev.cycle, set()).add(ev.bpu)
    assert all(len(b) == 1 for b in by_cycle.values())


def test_zero_stage_delay_step_span():
    s = schedule_single(sched_params(stage_delay=0), steps=1)
    assert s.cycles_per_step == 3
    s = schedule_single(sched_params(stage_delay=3), steps=1)
    assert s.cycles_per_step == 6


def test_multi_equals_single_for_one_codeword():
    p = sched_params(codewords=1)
    assert schedule_multi(p, steps=5) == schedule_single(p, steps=5)


def test_multi_full_pipeline_busy_and_scales():
    p = sched_params(codewords=4)
    m = schedule_multi(p, steps=2 * p.period)
    s = schedule_single(p, steps=2 * p.period)
    duty = m.bpu_busy_fraction()
    assert len(duty) == 4
    assert all(f == pytest.approx(1.0) for f in duty.values())
    assert m.steps_per_cycle() == pytest.approx(4 * s.steps_per_cycle())


def test_schedules_are_collision_free():
    for cw in (1, 2, 4):
        p = sched_params(codewords=cw)
        sched = schedule_multi(p, steps=3 * p.period)
        assert sched.audit_collisions() == []
    assert schedule_conventional(sched_params(), steps=8).audit_collisions() == []


def test_schedule_csv_rows_shape():
    s = schedule_single(sched_params(), steps=1)
    rows = s.csv_rows()
    assert all(len(r) == 5 for r in rows)
    ops = {r[2] for r in rows}
    assert "R" in ops and "W" in ops


def test_gantt_renders():
    text = schedule_multi(sched_params(codewords=2), steps=2).gantt()
    assert "BPU0" in text and "BPU1" in text


# ---------------------------------------------------------------------------
# storage trace


def test_ram_trace_counts():
    t = ram_trace_example()
    assert t.edge_rams == 16
    assert t.channel_rams == 8
    assert t.edge_rams_per_row == 8
    assert t.channel_rams_per_block == 4


def test_ram_trace_addresses_count_up():
    t = ram_trace_example()
    for _label, cells in t.snapshots:
        addresses = sorted({a for _r, a, _t in cells})
        assert addresses == [0, 1]


def test_ram_trace_matches_golden_text():
    assert ram_trace_example().render() == GOLDEN.read_text()


def test_ram_trace_narrated_facts():
    t = ram_trace_example()
    snaps = dict(t.snapshots)
    start = dict(((r, a), tag) for r, a, tag in
                 snaps["step 1: start of BPU_1 processing u[t0], v[t0-1]"])
    for ram in range(1, 9):
        for addr in (0, 1):
            assert start[(ram, addr)].startswith("v2c")
            assert start[(ram, addr)].endswith("u[t0]")
    for ram in range(9, 13):
        assert start[(ram, 0)] == "v2c v[t0]->u[t0+1]"
    for ram in range(13, 17):
        assert start[(ram, 0)] == "c2v u[t0-1]->v[t0-1]"
    final = dict(((r, a), tag) for r, a, tag in
                 snaps["after BPU_2: RAM 1-8 hold variable-to-check messages for u[t0+2]"])
    for ram in range(1, 9):
        for addr in (0, 1):
            assert final[(ram, addr)].startswith("v2c")
            assert final[(ram, addr)].endswith("u[t0+2]")

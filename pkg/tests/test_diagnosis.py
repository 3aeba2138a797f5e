import pytest

from marchsim.bist_sim import BistConfig
from marchsim.diagnosis import (
    EXPECTED_SYNDROMES,
    Capability,
    capability_matrix,
    detects,
    expected_syndrome_key,
    render_capability,
    render_syndromes,
    syndrome,
    syndrome_table,
)
from marchsim.fault_memory import (
    AlsoAccesses,
    BitAddress,
    Coupling,
    DecayMode,
    Edge,
    FaultClass,
    Idempotent,
    Inversion,
    MapsTo,
    MemoryConfig,
    NoAccess,
    Retention,
    StateCoupling,
    StuckAt,
    Transition,
)
from marchsim.march_core import builtin

CFG3 = BistConfig(c_size=3, word_width=4)
MEM8 = MemoryConfig(8, 1)


def test_zero_fault_syndrome_all_zero():
    for c_size in (2, 3, 4):
        cfg = BistConfig(c_size=c_size, word_width=2)
        assert syndrome(cfg, None).as_tuple() == (0, 0, 0, 0, 0, 0)


@pytest.mark.parametrize(
    "fault,key",
    [
        (StuckAt(BitAddress(2, 1), 0), "saf0"),
        (StuckAt(BitAddress(2, 1), 1), "saf1"),
        (Transition(BitAddress(2, 1), Edge.RISING), "tf_rising"),
        (Transition(BitAddress(2, 1), Edge.FALLING), "tf_falling"),
    ],
)
def test_saf_tf_syndrome_rows(fault, key):
    assert syndrome(CFG3, fault).as_tuple() == EXPECTED_SYNDROMES[key]


def test_syndrome_cell_position_independence():
    for word in range(8):
        for bit in (0, 3):
            cell = BitAddress(word, bit)
            assert syndrome(CFG3, StuckAt(cell, 0)).as_tuple() == EXPECTED_SYNDROMES["saf0"]
            assert syndrome(CFG3, Transition(cell, Edge.FALLING)).as_tuple() == EXPECTED_SYNDROMES["tf_falling"]


def test_af_noaccess_syndrome_matches_table():
    assert syndrome(CFG3, NoAccess(5)).as_tuple() == EXPECTED_SYNDROMES["af"]


def test_drf_pause_differential():
    cfg = BistConfig(c_size=8, word_width=32)
    # limit inside (pass, pass+pause): only the pause makes the gap decay
    drf = Retention(BitAddress(0, 0), 300, DecayMode.COMPLEMENT)
    syn = syndrome(cfg, drf)
    assert syn.f3 == 1 and syn.f6 == 1
    # fast-forwarding the pause in the primary run kills the detection
    syn_ff = syndrome(cfg, drf, fast_forward_pause=True)
    assert syn_ff.f3 == 0 and syn_ff.f6 == 0


def test_drf_f6_implies_f3():
    cfg = BistConfig(c_size=4, word_width=2)
    for limit in (3, 17, 24, 40, 200):
        syn = syndrome(cfg, Retention(BitAddress(3, 0), limit, DecayMode.COMPLEMENT))
        if syn.f6:
            assert syn.f3 == 1


def test_drf_short_limit_all_read_passes_detect():
    # Complement decay with the limit below the pass length reproduces the
    # all-ones F1..F5 row on mid-range cells.
    cfg = BistConfig(c_size=8, word_width=32)
    syn = syndrome(cfg, Retention(BitAddress(100, 0), 64, DecayMode.COMPLEMENT))
    assert syn.as_tuple()[:5] == (1, 1, 1, 1, 1)


def test_detects_march_c_minus_all_saf():
    alg = builtin("march_c-")
    for w in range(8):
        for v in (0, 1):
            assert detects(alg, StuckAt(BitAddress(w, 0), v), MEM8) == 1


def test_detects_mats_plus_tf_falling_escape():
    # The final write-0 is blocked and never read again.
    assert detects(builtin("mats+"), Transition(BitAddress(0, 0), Edge.FALLING), MEM8) == 0


def test_detects_mats_plus_saf():
    alg = builtin("mats+")
    assert all(
        detects(alg, StuckAt(BitAddress(w, 0), v), MEM8) == 1
        for w in range(8)
        for v in (0, 1)
    )


def test_detects_clean_memory():
    for name in ("mats+", "march_c-", "march_b", "march_c_pause"):
        assert detects(builtin(name), None, MEM8) == 0


def test_detects_address_symmetry_for_saf():
    alg = builtin("march_x")
    results = {w: detects(alg, StuckAt(BitAddress(w, 0), 1), MEM8) for w in range(8)}
    assert len(set(results.values())) == 1


def test_capability_march_c_minus_full_cf_coverage():
    matrix = capability_matrix(
        [builtin("march_c-")],
        [FaultClass.SAF, FaultClass.TF, FaultClass.CFIN, FaultClass.CFID, FaultClass.CFST],
        MEM8,
    )
    for (_, cls), cap in matrix.items():
        assert cap.label == "All", cls


def test_capability_mats_plus():
    matrix = capability_matrix(
        [builtin("mats+")], [FaultClass.SAF, FaultClass.TF, FaultClass.AF], MEM8
    )
    assert matrix[("mats+", FaultClass.SAF)].label == "All"
    tf = matrix[("mats+", FaultClass.TF)]
    assert 0 < tf.detected < tf.total  # strictly partial: the falling escape
    assert matrix[("mats+", FaultClass.AF)].label == "All"


def test_capability_mats_plus_af_subtypes():
    # MapsTo and AlsoAccesses instances are all caught individually too.
    for a in range(4):
        for b in range(4):
            if a == b:
                continue
            assert detects(builtin("mats+"), MapsTo(a, b), MemoryConfig(4, 1)) == 1
            assert detects(builtin("mats+"), AlsoAccesses(a, b), MemoryConfig(4, 1)) == 1


def test_capability_guard():
    with pytest.raises(ValueError):
        capability_matrix([builtin("mats+")], [FaultClass.SAF], MemoryConfig(1024, 1))


def test_capability_reproducible_across_worker_counts():
    classes = [FaultClass.SAF, FaultClass.CFIN]
    algs = [builtin("mats+"), builtin("march_c-")]
    seq = capability_matrix(algs, classes, MEM8, workers=1)
    par = capability_matrix(algs, classes, MEM8, workers=4)
    assert seq == par


def test_syndrome_table_render(tmp_path):
    faults = [StuckAt(BitAddress(0, 0), 0), Transition(BitAddress(0, 0), Edge.FALLING)]
    rows = syndrome_table(CFG3, faults)
    assert all(r.matches_expected for r in rows)
    text = render_syndromes(rows, compare=True)
    assert "ok" in text and "F6" in text
    js = render_syndromes(rows, fmt="json")
    assert '"matches_expected": true' in js


def test_syndrome_table_workers_deterministic():
    faults = [
        StuckAt(BitAddress(w, 0), v) for w in range(4) for v in (0, 1)
    ]
    a = syndrome_table(CFG3, faults, workers=1)
    b = syndrome_table(CFG3, faults, workers=4)
    assert [r.syndrome for r in a] == [r.syndrome for r in b]


def test_render_capability_table():
    matrix = {
        ("mats+", FaultClass.SAF): Capability(16, 16),
        ("mats+", FaultClass.TF): Capability(8, 16),
    }
    text = render_capability(matrix, ["mats+"], [FaultClass.SAF, FaultClass.TF])
    assert "All" in text and "Partial(8/16)" in text


def test_expected_syndrome_keys():
    assert expected_syndrome_key(StuckAt(BitAddress(0, 0), 1)) == "saf1"
    assert expected_syndrome_key(NoAccess(0)) == "af"
    assert expected_syndrome_key(Coupling(Inversion(Edge.ANY), BitAddress(0, 0), BitAddress(1, 0))) == "cf"
    assert expected_syndrome_key(Coupling(Idempotent(Edge.ANY, 1), BitAddress(0, 0), BitAddress(1, 0))) == "cf"
    assert expected_syndrome_key(Coupling(StateCoupling(0, 1), BitAddress(0, 0), BitAddress(1, 0))) == "cf"
    assert expected_syndrome_key(Retention(BitAddress(0, 0), 4, DecayMode.TO_ONE)) == "drf"

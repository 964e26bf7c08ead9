from __future__ import annotations

import itertools
import json

import pytest

from kleinsail.exact import IntPoly
from kleinsail.matops import IntMatrix, companion, det, inverse, poly_at_matrix
from kleinsail.survey import (
    CANDIDATE,
    INEQUIVALENT,
    MATCHED,
    NOT_HYPERBOLIC,
    NOT_UNIMODULAR,
    REDUCIBLE,
    ReferenceOrder,
    batch_charpolys,
    block_matrices,
    classify,
    enumerate_matrices,
    expected_count,
    run_survey,
)

A1 = companion((1, -3, 0, 4))


@pytest.mark.parametrize("s", [1, 2, 3, 4])
def test_enumeration_is_exact(s):
    mats = [tuple(a for r in m.rows for a in r) for m in enumerate_matrices(s)]
    assert len(mats) == len(set(mats)) == expected_count(s)
    assert all(sum(map(abs, m)) < s for m in mats)


def test_enumeration_small_cases():
    assert [m for m in enumerate_matrices(1)] == [IntMatrix.zero()]
    assert IntMatrix.identity() in set(enumerate_matrices(5))
    # A_3 has |entries| summing to 11, outside the survey range
    assert companion((-1, -3, 1, 3)).abs_sum() == 11


def test_enumeration_is_deterministic():
    assert list(enumerate_matrices(3)) == list(enumerate_matrices(3))


def test_batch_charpolys_match_exact():
    from kleinsail.matops import char_poly

    mats = block_matrices(3, (1, 2, 1))[:500]
    cps = batch_charpolys(mats)
    for row, cp in zip(mats, cps):
        m = IntMatrix(row.reshape(4, 4).tolist())
        assert char_poly(m) == IntPoly(list(cp) + [1])


def test_classify_examples():
    assert classify(IntMatrix.identity()).verdict == REDUCIBLE
    assert classify(A1).verdict == CANDIDATE
    assert classify(IntMatrix.zero()).verdict == NOT_UNIMODULAR
    assert classify(companion((-1, 0, 0, 0))).verdict == NOT_HYPERBOLIC


def test_classify_invariance():
    perms = list(itertools.permutations(range(4)))
    mats = [m for m in enumerate_matrices(5)][::97]
    for k, m in enumerate(mats):
        p = perms[k % len(perms)]
        s = [1 if (k >> i) & 1 else -1 for i in range(4)]
        q = IntMatrix([[s[i] * int(p[i] == j) for j in range(4)] for i in range(4)])
        conj = q @ m @ q.T
        assert classify(conj).verdict == classify(m).verdict
        assert classify(m.T).verdict == classify(m).verdict


def test_vectorized_survey_agrees_with_direct_classification():
    direct = run_survey(4, matrices=list(enumerate_matrices(4)))
    fast = run_survey(4)
    assert direct.counts == fast.counts
    assert direct.det_sign_counts == fast.det_sign_counts


def test_survey_5_has_no_candidates():
    rep = run_survey(5)
    # exhaustive run as its own oracle, frozen
    assert rep.counts == {NOT_UNIMODULAR: 49665, REDUCIBLE: 336, NOT_HYPERBOLIC: 48, CANDIDATE: 0}
    assert rep.candidates == []


def test_survey_on_reference_itself():
    rep = run_survey(8, matrices=[A1])
    assert [c.status for c in rep.candidates] == [MATCHED]
    w = rep.candidates[0].witness
    n = poly_at_matrix(w.q, A1)
    assert abs(det(w.p)) == 1 and w.p @ n == A1 @ w.p


def test_conjugacy_witness_is_exact():
    order = ReferenceOrder(A1)
    p = IntMatrix([[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 2], [0, 0, 0, 1]])
    target = p @ A1 @ inverse(p)
    w = order.conjugate(target)
    assert w is not None
    n = poly_at_matrix(w.q, A1)
    assert abs(det(w.p)) == 1
    assert w.p @ n == target @ w.p


def test_field_obstruction():
    order = ReferenceOrder(A1)
    assert order.field_obstructed(IntPoly([1, 0, -4, 0, 1]))
    assert not order.field_obstructed(IntPoly([1, 1, -3, -1, 1]))
    rep = run_survey(8, matrices=[companion((-1, 0, 4, 0))])
    assert [c.status for c in rep.candidates] == [INEQUIVALENT]


def test_survey_determinism_across_workers(tmp_path):
    a = json.dumps(run_survey(6, workers=1).to_dict(), sort_keys=True)
    b = json.dumps(run_survey(6, workers=2).to_dict(), sort_keys=True)
    assert a == b


def test_checkpoint_resume(tmp_path):
    ck = tmp_path / "ck.json"
    first = run_survey(5, checkpoint=ck)
    assert ck.exists()
    data = json.loads(ck.read_text())
    data["blocks"] = data["blocks"][: len(data["blocks"]) // 2]
    ck.write_text(json.dumps(data))
    second = run_survey(5, checkpoint=ck)
    assert first.to_dict() == second.to_dict()


def test_bound_cap():
    with pytest.raises(ValueError):
        run_survey(9)

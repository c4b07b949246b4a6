import random
from fractions import Fraction

import pytest

from affineqe.extension import (
    DeformationTensor, ExtensionError, build_extension,
    conformal_einstein_residual, curvature4, default_probe_points,
    gradient_norm_sq, verify_theorem_1_1, _frobenius,
)
from affineqe.funcalg import Context, Point, constant, exp_linear, monomial, to_bundle
from affineqe.surface import AffineConnection2, ricci

A2 = AffineConnection2.type_a(c121=2, c222=1)
HYPERBOLIC = AffineConnection2.type_b(c111=-1, c122=-1, c221=1)
NONSYM = AffineConnection2.type_b(c121=1, c222=1, c122=1)
POINTS = default_probe_points()


def test_build_extension_values():
    m = build_extension(A2)
    p = Point((0.0, 0.0, 1.0, 1.0))
    mat = m.eval_matrix(p)
    assert mat[0][1] == pytest.approx(-4.0)  # -2 y1 Gamma_12^1
    assert mat[1][1] == pytest.approx(-2.0)  # -2 y2 Gamma_22^2
    assert mat[0][0] == pytest.approx(0.0)
    assert mat[0][2] == pytest.approx(1.0)
    assert mat[2][2] == pytest.approx(0.0)


def test_flat_extension_is_flat():
    m = build_extension(AffineConnection2.type_a())
    pack = curvature4(m)
    assert all(pack.riemann_up[a][b][c][d].is_zero()
               for a in range(4) for b in range(4)
               for c in range(4) for d in range(4))


def test_signature_2_2():
    m = build_extension(A2)
    for p in POINTS[:3]:
        mat = [[v.real for v in row] for row in m.eval_matrix(p)]
        # characteristic signs via leading principal minors is unreliable for
        # indefinite metrics; count eigenvalue signs numerically instead
        eig = _eigenvalues_sym(mat)
        assert sum(1 for e in eig if e > 0) == 2
        assert sum(1 for e in eig if e < 0) == 2


def _eigenvalues_sym(mat):
    # Jacobi rotations, enough for a 4x4 symmetric real matrix
    import math

    n = 4
    a = [row[:] for row in mat]
    for _ in range(60):
        off = max((abs(a[i][j]), i, j) for i in range(n) for j in range(n)
                  if i != j)
        if off[0] < 1e-12:
            break
        _, i, j = off
        if abs(a[i][i] - a[j][j]) < 1e-300:
            theta = math.pi / 4
        else:
            theta = 0.5 * math.atan2(2 * a[i][j], a[i][i] - a[j][j])
        c, s = math.cos(theta), math.sin(theta)
        for k in range(n):
            aik, ajk = a[i][k], a[j][k]
            a[i][k] = c * aik + s * ajk
            a[j][k] = -s * aik + c * ajk
        for k in range(n):
            aki, akj = a[k][i], a[k][j]
            a[k][i] = c * aki + s * akj
            a[k][j] = -s * aki + c * akj
    return [a[i][i] for i in range(n)]


def test_hyperbolic_extension_with_phi():
    phi = DeformationTensor(monomial(Context.TYPE_B, x2=1),
                            constant(0, Context.TYPE_B).scale(0),
                            constant(0, Context.TYPE_B).scale(0))
    m = build_extension(HYPERBOLIC, phi)
    mat = m.eval_matrix(Point((1.0, 0.0, 0.0, 0.0)))
    assert mat[0][0] == pytest.approx(0.0)  # Phi_11 = x2 vanishes at x2 = 0
    assert mat[0][1] == pytest.approx(0.0)


def test_ricci_pullback_identity():
    rng = random.Random(3)
    for _ in range(6):
        kind = rng.choice(["A", "B"])
        coeffs = [rng.randint(-2, 2) for _ in range(6)]
        conn = AffineConnection2(kind, tuple(coeffs))
        ctx = conn.context
        phi = DeformationTensor(
            monomial(ctx, coeff=rng.randint(-2, 2), pow1=rng.randint(0, 2)),
            monomial(ctx, coeff=rng.randint(-2, 2), x2=rng.randint(0, 2)),
            monomial(ctx, coeff=rng.randint(-2, 2), pow1=1, x2=1))
        pack = curvature4(build_extension(conn, phi))
        rho_s = ricci(conn).rho_s
        for a in range(4):
            for b in range(4):
                want = (to_bundle(rho_s[a][b]).scale(2)
                        if a < 2 and b < 2
                        else constant(0, Context.FOURD).scale(0))
                assert pack.ricci[a][b] == want
        assert pack.ricci_is_symmetric()
        assert pack.first_bianchi_zero()
        assert all(t.is_zero() for t in pack.weyl_trace_residuals())
        # the same (anti-self-dual) half vanishes for every instance
        _, minus = pack.weyl_halves()
        assert all(v.is_zero() for row in minus for v in row)


def test_isotropy_structural():
    m = build_extension(NONSYM)
    f = monomial(Context.TYPE_B, pow1=1, x2=2) + monomial(Context.TYPE_B, log=1)
    assert gradient_norm_sq(m, to_bundle(f)).is_zero()


def test_weyl_remark_cases():
    # Type A with Phi = 0: whole Weyl vanishes
    pack = curvature4(build_extension(A2))
    assert all(pack.weyl[a][b][c][d].is_zero()
               for a in range(4) for b in range(4)
               for c in range(4) for d in range(4))
    # Type A with Phi_11 = (x2)^2: self-dual half survives
    phi = DeformationTensor(monomial(Context.TYPE_A, x2=2),
                            constant(0, Context.TYPE_A).scale(0),
                            constant(0, Context.TYPE_A).scale(0))
    pack = curvature4(build_extension(A2, phi))
    plus, minus = pack.weyl_halves()
    assert all(v.is_zero() for row in minus for v in row)
    assert max(_frobenius(plus, p) for p in POINTS) > 1e-3
    # non-projectively-flat Type B keeps a nonzero half for Phi = 0 too
    pack = curvature4(build_extension(NONSYM))
    plus, minus = pack.weyl_halves()
    assert all(v.is_zero() for row in minus for v in row)
    assert max(_frobenius(plus, p) for p in POINTS) > 1e-3


def test_verify_theorem_1_1_a2():
    report = verify_theorem_1_1(A2, DeformationTensor.zero(Context.TYPE_A),
                                Fraction(-1), exp_linear(0, 2), POINTS)
    assert report.passed
    names = {c.name: c for c in report.checks}
    assert names["quasi_einstein_symbolic"].max_residual == 0.0
    assert names["ricci_equals_2_pullback"].max_residual == 0.0
    assert names["quasi_einstein_numeric"].max_residual <= 1e-8
    assert report.metadata["mu_cotangent"] == "-1/2"


def test_verify_theorem_1_1_type_b_any_phi():
    rng = random.Random(11)
    phi = DeformationTensor(
        monomial(Context.TYPE_B, coeff=rng.randint(-2, 2), pow1=2),
        monomial(Context.TYPE_B, coeff=rng.randint(-2, 2), pow1=1, x2=1),
        monomial(Context.TYPE_B, coeff=rng.randint(-2, 2), x2=2))
    f = monomial(Context.TYPE_B, pow1=1)
    report = verify_theorem_1_1(NONSYM, phi, Fraction(-1), f, POINTS)
    assert report.passed
    assert report.metadata["mu_cotangent"] == "-1/2"


def test_verify_theorem_1_1_flat_trivial():
    flat = AffineConnection2.type_a()
    report = verify_theorem_1_1(flat, DeformationTensor.zero(Context.TYPE_A),
                                Fraction(2), constant(1, Context.TYPE_A),
                                POINTS)
    assert report.passed


def test_verify_precondition_failure_reported():
    bad = exp_linear(0, 1)  # not in E(-1, A2)
    report = verify_theorem_1_1(A2, DeformationTensor.zero(Context.TYPE_A),
                                Fraction(-1), bad, POINTS)
    assert not report.passed
    assert report.checks[0].name == "precondition_qe_residual"
    assert not report.checks[0].passed


def test_conformal_einstein_hyperbolic():
    m = build_extension(HYPERBOLIC)
    f = monomial(Context.TYPE_B, pow1=-1)
    assert conformal_einstein_residual(m, f, POINTS) <= 1e-8


def test_conformal_einstein_t115_any_phi():
    phi = DeformationTensor(
        monomial(Context.TYPE_B, coeff=2, pow1=1),
        monomial(Context.TYPE_B, coeff=-1, x2=1),
        monomial(Context.TYPE_B, coeff=3, pow1=2, x2=2))
    m = build_extension(NONSYM, phi)
    f = monomial(Context.TYPE_B, pow1=1)
    assert conformal_einstein_residual(m, f, POINTS) <= 1e-8


def test_power_log_deformation():
    from fractions import Fraction

    phi = DeformationTensor(
        monomial(Context.TYPE_B, coeff=2, pow1=Fraction(1, 2), log=1),
        monomial(Context.TYPE_B, coeff=-1, pow1=1, x2=1),
        monomial(Context.TYPE_B, coeff=3, log=2))
    f = monomial(Context.TYPE_B, pow1=1)
    report = verify_theorem_1_1(NONSYM, phi, Fraction(-1), f, POINTS)
    assert report.passed
    assert conformal_einstein_residual(build_extension(NONSYM, phi), f,
                                       POINTS) <= 1e-8


def test_conformal_einstein_flat():
    m = build_extension(AffineConnection2.type_a())
    f = constant(1, Context.TYPE_A)
    assert conformal_einstein_residual(m, f, POINTS) == 0.0


def test_conformal_requires_mu_minus_one():
    m = build_extension(A2)
    with pytest.raises(ExtensionError):
        conformal_einstein_residual(m, exp_linear(0, 1), POINTS)


def test_weyl_dichotomy_sweep():
    # undeformed extensions: conformally flat iff the base is strongly
    # projectively flat; otherwise exactly the distinguished half dies
    from affineqe.surface import is_strongly_projectively_flat

    rng = random.Random(321)
    checked = 0
    while checked < 10:
        conn = AffineConnection2.type_b(*[rng.randint(-2, 2)
                                          for _ in range(6)])
        if ricci(conn).is_flat:
            continue
        pack = curvature4(build_extension(conn))
        full_zero = all(pack.weyl[a][b][c][d].is_zero()
                        for a in range(4) for b in range(4)
                        for c in range(4) for d in range(4))
        if is_strongly_projectively_flat(conn):
            assert full_zero
        else:
            plus, minus = pack.weyl_halves()
            assert all(v.is_zero() for row in minus for v in row)
            assert max(_frobenius(plus, p) for p in POINTS) > 1e-6
        checked += 1


def test_fiber_distribution_parallel():
    # Levi-Civita symbols never map the fiber span back into x-directions
    for conn in (A2, NONSYM):
        pack = curvature4(build_extension(conn))
        for a in range(4):
            for yi in (2, 3):
                for xj in (0, 1):
                    assert pack.christoffel[xj][a][yi].is_zero()

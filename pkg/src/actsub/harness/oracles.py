"""Independent-oracle checks, runnable from the CLI (`actsub oracle`).

Each check recomputes an expected answer through a route independent of
the implementation under test (scalar loops, Gram-Schmidt, power
iteration, brute-force gradients, finite differences) and compares at a
pinned tolerance. One of the checks is a deliberate mutation: it verifies
that reading the second-moment transport through raw instead of
bias-corrected moments breaks full-rank Adam equivalence, i.e. that the
equivalence oracle can actually fail.
"""

from __future__ import annotations

import copy
import math

import numpy as np

from ..numerics import fro_norm, make_rng, matmul, qr_orthonormalize, sym_eig_topr
from ..optim import AdamHyper, FullAdamState, LowRankAdamState, apply_update, full_adam_step, lowrank_adam_step
from ..subspace import (
    OjaConfig,
    OjaTracker,
    SubspaceBasis,
    drift,
    init_basis,
    oja_step,
    principal_angles,
)
from ..traingraph import Batch, Mlp2Model, backward_linear, forward_linear


def _check_matmul_triple_loop():
    rng = make_rng(11)
    a = rng.standard_normal((7, 5))
    b = rng.standard_normal((5, 3))
    got = matmul(a, b)
    want = np.zeros((7, 3))
    for i in range(7):
        for j in range(3):
            acc = 0.0
            for k in range(5):
                acc += a[i, k] * b[k, j]
            want[i, j] = acc
    err = np.abs(got - want).max()
    return err <= 1e-12, f"max abs err {err:.3e} (tol 1e-12)"


def _modified_gram_schmidt(a):
    a = a.copy()
    d, r = a.shape
    q = np.zeros((d, r))
    for j in range(r):
        v = a[:, j].copy()
        for i in range(j):
            v -= (q[:, i] @ v) * q[:, i]
        q[:, j] = v / np.sqrt(v @ v)
    return q


def _check_qr_contract():
    rng = make_rng(12)
    a = rng.standard_normal((16, 4))
    q = qr_orthonormalize(a)
    ortho = fro_norm(q.T @ q - np.eye(4))
    mgs = _modified_gram_schmidt(a)
    span = fro_norm(q @ q.T - mgs @ mgs.T)
    ok = ortho < 1e-10 and span < 1e-8
    return ok, f"orthonormality {ortho:.3e} (tol 1e-10), projector vs MGS {span:.3e} (tol 1e-8)"


def _power_iteration_top(c, iters=5000, tol=1e-14):
    rng = make_rng(13)
    v = rng.standard_normal(c.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = c @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v_new = w / nw
        lam_new = float(v_new @ c @ v_new)
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new
        v, lam = v_new, lam_new
    return lam


def _check_eig_residual_power():
    rng = make_rng(14)
    b = rng.standard_normal((8, 3))
    c = b @ b.T
    pair = sym_eig_topr(c, 3)
    worst = 0.0
    for i in range(3):
        resid = np.linalg.norm(c @ pair.vectors[:, i] - pair.values[i] * pair.vectors[:, i])
        worst = max(worst, resid / (1.0 + abs(pair.values[i])))
    top = _power_iteration_top(c)
    rel = abs(pair.values[0] - top) / max(abs(top), 1e-30)
    ok = worst <= 1e-8 and rel <= 1e-6
    return ok, f"max scaled residual {worst:.3e} (tol 1e-8), top vs power iter {rel:.3e} (tol 1e-6)"


def _check_fro_norm_loop():
    rng = make_rng(15)
    a = rng.standard_normal((6, 6))
    acc = 0.0
    for i in range(6):
        for j in range(6):
            acc += a[i, j] * a[i, j]
    want = math.sqrt(acc)
    err = abs(fro_norm(a) - want)
    return err <= 1e-13, f"abs err {err:.3e} (tol 1e-13)"


def _check_covariance_loop():
    from ..subspace import covariance

    rng = make_rng(16)
    x = rng.standard_normal((32, 8))
    got = covariance(x)
    want = np.zeros((8, 8))
    for i in range(8):
        for j in range(8):
            acc = 0.0
            for t in range(32):
                acc += x[t, i] * x[t, j]
            want[i, j] = acc / 32.0
    err = np.abs(got - want).max()
    return err <= 1e-12, f"max abs err {err:.3e} (tol 1e-12)"


def _check_oja_stationary():
    d, r = 8, 2
    c = np.diag([4.0, 1.0] + [0.25] * (d - 2))
    rng = make_rng(17)
    basis = SubspaceBasis(qr_orthonormalize(rng.standard_normal((d, r))))
    cfg = OjaConfig(gamma=0.1)
    for _ in range(500):
        basis, _ = oja_step(basis, c, cfg)
    angle = principal_angles(basis.matrix, np.eye(d)[:, :r]).max()
    return angle < 1e-3, f"largest principal angle {angle:.3e} after 500 steps (tol 1e-3)"


def _check_drift_contract():
    checks = [
        abs(drift(np.eye(4)) - 0.0) <= 1e-15,
        abs(drift(np.zeros((4, 4))) - 1.0) <= 1e-15,
        abs(drift(np.diag([1.0, 0.0])) - math.sqrt(0.5)) <= 1e-12,
    ]
    rng = make_rng(18)
    u = qr_orthonormalize(rng.standard_normal((10, 3)))
    rot = qr_orthonormalize(rng.standard_normal((3, 3)))
    t_inspan = (u @ rot).T @ u
    checks.append(drift(t_inspan) < 1e-8)
    ok = all(checks)
    return ok, f"identity/orthogonal/diag/in-span cases: {checks}"


def _check_scale_equivariance():
    rng = make_rng(19)
    d, r = 10, 3
    x = rng.standard_normal((40, d))
    c = (x.T @ x) / 40.0
    c = (c + c.T) / 2.0
    basis = SubspaceBasis(qr_orthonormalize(rng.standard_normal((d, r))))
    cfg = OjaConfig(gamma=0.1)
    ref, _ = oja_step(basis, c, cfg)
    worst = 0.0
    for alpha in (0.25, 4.0, 3.7, 1e6):
        scaled, _ = oja_step(basis, alpha * c, cfg)
        worst = max(worst, float(np.abs(scaled.matrix - ref.matrix).max()))
    return worst <= 1e-12, f"max deviation across scales {worst:.3e} (tol 1e-12)"


def _check_adam_scalar_recursion():
    hyper = AdamHyper(eta=0.05)
    rng = make_rng(20)
    grads = [rng.standard_normal((3, 2)) for _ in range(60)]
    state = FullAdamState.zeros(3, 2)
    w = np.zeros((3, 2))
    for g in grads:
        state, upd = full_adam_step(state, g, hyper)
        w = w + upd
    # independent scalar recursion per coordinate
    worst = 0.0
    for i in range(3):
        for j in range(2):
            m = v = 0.0
            wij = 0.0
            for t, g in enumerate(grads, start=1):
                m = hyper.beta1 * m + (1 - hyper.beta1) * g[i, j]
                v = hyper.beta2 * v + (1 - hyper.beta2) * g[i, j] ** 2
                mh = m / (1 - hyper.beta1**t)
                vh = v / (1 - hyper.beta2**t)
                wij -= hyper.eta * mh / (math.sqrt(vh) + hyper.eps)
            worst = max(worst, abs(w[i, j] - wij))
    return worst <= 1e-12, f"max abs deviation {worst:.3e} (tol 1e-12)"


def _run_fullrank_pair(step_fn, steps=120, seed=21):
    rng = make_rng(seed)
    d, m = 9, 4
    hyper = AdamHyper(eta=0.01)
    eye = np.eye(d)
    basis = SubspaceBasis(eye)
    low = LowRankAdamState.zeros(d, m)
    full = FullAdamState.zeros(d, m)
    w_low = rng.uniform(-1.0, 1.0, (d, m))
    w_full = w_low.copy()
    worst = 0.0
    for _ in range(steps):
        g = rng.standard_normal((d, m))
        low, direction = step_fn(low, g, eye, hyper)
        w_low = apply_update(w_low, basis, direction, hyper.eta)
        full, upd = full_adam_step(full, g, hyper)
        w_full = w_full + upd
        worst = max(worst, fro_norm(w_low - w_full) / max(fro_norm(w_full), 1e-30))
    return worst


def _check_fullrank_equivalence():
    worst = _run_fullrank_pair(lowrank_adam_step)
    return worst <= 1e-10, f"max relative divergence {worst:.3e} over 120 steps (tol 1e-10)"


def _lowrank_step_raw_moments(state, grad, tmat, hyper):
    """Mutated transport: raw (not bias-corrected) previous moments."""
    b1, b2 = hyper.beta1, hyper.beta2
    t = state.step + 1
    m_new = b1 * (tmat @ state.m) + (1.0 - b1) * grad
    if t == 1:
        v_new = (1.0 - b2) * grad * grad
    else:
        bracket = (tmat * tmat) @ (state.v - state.m * state.m) + (tmat @ state.m) ** 2
        v_new = b2 * (1.0 - b2 ** (t - 1)) * np.abs(bracket) + (1.0 - b2) * grad * grad
    m_hat = m_new / (1.0 - b1**t)
    v_hat = v_new / (1.0 - b2**t)
    return LowRankAdamState(m_new, v_new, t), m_hat / (np.sqrt(v_hat) + hyper.eps)


def _check_raw_moment_mutation_detected():
    worst = _run_fullrank_pair(_lowrank_step_raw_moments)
    return worst > 1e-10, (
        f"mutated transport diverges by {worst:.3e} (> 1e-10), so the "
        "equivalence oracle has teeth"
    )


def _check_gradient_projection():
    from ..subspace import FixedTracker
    from ..traingraph import CompressedLinear

    rng = make_rng(22)
    worst_proj = 0.0
    worst_normal = 0.0
    for d, n_rows, m, r in ((64, 256, 32, 8), (17, 40, 5, 3), (30, 64, 9, 30)):
        x = rng.standard_normal((n_rows, d))
        layer = CompressedLinear("probe", rng.standard_normal((d, m)), r, FixedTracker())
        layer.set_basis(SubspaceBasis(qr_orthonormalize(rng.standard_normal((d, r)))))
        forward_linear(layer, x)
        g_out = rng.standard_normal((n_rows, m))
        u = layer.basis.matrix
        _, g_low = backward_linear(layer, g_out)
        lifted = u @ g_low
        true_grad = x.T @ g_out  # brute-force full gradient
        worst_proj = max(worst_proj, np.abs(lifted - u @ (u.T @ true_grad)).max())
        worst_normal = max(worst_normal, np.abs(u.T @ (lifted - true_grad)).max())
    ok = worst_proj <= 1e-10 and worst_normal <= 1e-10
    return ok, (
        f"projection err {worst_proj:.3e}, normal equations {worst_normal:.3e} (tol 1e-10)"
    )


def _check_finite_difference_mlp():
    from ..subspace import FixedTracker

    rng = make_rng(23)
    d = hidden = 6
    classes = 3
    model = Mlp2Model(d, hidden, classes, rank=d, tracker=FixedTracker(), rng=rng)
    x = rng.standard_normal((24, d))
    labels = rng.integers(0, classes, size=24)
    batch = Batch(x, labels)
    model.initialize(batch)
    grads = copy.deepcopy(model).gradients(batch)
    h = 1e-5
    worst = 0.0
    coord_rng = make_rng(24)
    for _ in range(20):
        layer = model.lin1 if coord_rng.random() < 0.5 else model.lin2
        i = int(coord_rng.integers(0, layer.weight.shape[0]))
        j = int(coord_rng.integers(0, layer.weight.shape[1]))
        orig = layer.weight[i, j]
        layer.weight[i, j] = orig + h
        up = model.evaluate_loss(batch)
        layer.weight[i, j] = orig - h
        down = model.evaluate_loss(batch)
        layer.weight[i, j] = orig
        fd = (up - down) / (2 * h)
        got = grads[layer.name][i, j]
        worst = max(worst, abs(got - fd) / max(abs(fd), 1e-8))
    return worst < 1e-4, f"max relative error {worst:.3e} over 20 coordinates (tol 1e-4)"


def _check_init_basis_oracle():
    rng = make_rng(25)
    d, r = 5, 2
    coords = rng.standard_normal((50, r))
    x = np.zeros((50, d))
    x[:, :r] = coords
    basis = init_basis(x, r)
    angle = principal_angles(basis.matrix, np.eye(d)[:, :r]).max()
    return angle < 1e-8, f"principal angle to planted span {angle:.3e} (tol 1e-8)"


SUITES = {
    "numerics": [
        ("matmul_triple_loop", _check_matmul_triple_loop),
        ("qr_contract_vs_mgs", _check_qr_contract),
        ("eig_residual_and_power_iteration", _check_eig_residual_power),
        ("fro_norm_scalar_loop", _check_fro_norm_loop),
    ],
    "subspace": [
        ("covariance_scalar_loop", _check_covariance_loop),
        ("init_basis_planted_span", _check_init_basis_oracle),
        ("oja_stationary_convergence", _check_oja_stationary),
        ("drift_contract", _check_drift_contract),
        ("oja_scale_equivariance", _check_scale_equivariance),
    ],
    "optim": [
        ("adam_scalar_recursion", _check_adam_scalar_recursion),
        ("fullrank_adam_equivalence", _check_fullrank_equivalence),
        ("raw_moment_mutation_detected", _check_raw_moment_mutation_detected),
    ],
    "traingraph": [
        ("gradient_projection_bruteforce", _check_gradient_projection),
        ("finite_difference_mlp", _check_finite_difference_mlp),
    ],
}


def oracle_check(suite: str = "all", out=print) -> bool:
    """Run one suite (or all) and print a machine-readable pass/fail table."""
    if suite == "all":
        names = list(SUITES)
    elif suite in SUITES:
        names = [suite]
    else:
        raise ValueError(f"unknown suite {suite!r}; choose from {['all', *SUITES]}")
    all_ok = True
    for name in names:
        for check_name, fn in SUITES[name]:
            ok, detail = fn()
            all_ok = all_ok and ok
            out(f"{'PASS' if ok else 'FAIL'}\t{name}.{check_name}\t{detail}")
    out(f"{'PASS' if all_ok else 'FAIL'}\toverall")
    return all_ok

"""Ready-made q-weight specs used by the self-checks, tests and the CLI."""

import numpy as np

from .bweight import Atom, WeightFamily, lambda_tilde_map, rho_and_mu
from .condform import complete_to_cond_zero
from .qweight import QWeightSpec, theta_of_unit_gap
from .superop import SuperOperator


def unit_target(W):
    """theta(I - Lambda(I_o)) in range coordinates."""
    return theta_of_unit_gap(W)


def unital_psi(W, C=None, extra=None):
    """psi with psi + rho Lambda~ (+ extra) conditionally zero and psi(I_o) = theta(I - Lambda(I_o))."""
    rho, _ = rho_and_mu(W)
    base = lambda_tilde_map(rho)
    if extra is not None:
        base = base + extra
    return complete_to_cond_zero(base, unit_target(W), C)


def scalar_rank_one():
    """q = m = 1, g = x^-1/2 e^-x/2 and psi = s0 with s0 = mu(I - Lambda) = ln 2."""
    W = WeightFamily.standard(1, 1, [[Atom(-0.5, 0.5, [1.0])]])
    return QWeightSpec(unital_psi(W), W)


def full_range_q2():
    """p = q = 2, m = 1, one divergent g, h = 0, unital."""
    W = WeightFamily.standard(2, 1, [[Atom(-0.8, 1.0, [1.0])]])
    C = np.array([[0.3, 0.1 + 0.2j], [0.1 - 0.2j, -0.1]])
    return QWeightSpec(unital_psi(W, C), W)


def coupled_q2():
    """p = q = 2, m = 1 with two g's and h terms obeying sum_i L_i* h_ik = 0."""
    g = [[Atom(-0.8, 1.0, [1.0])],
         [Atom(-0.6, 0.7, [1.0]), Atom(0.5, 1.2, [0.4])]]
    h = [[[Atom(1.0, 1.0, [0.3, 0.2j])], [Atom(1.0, 1.0, [0.1, -0.3])]],
         [[Atom(1.5, 0.8, [0.0, 0.25])], [Atom(1.5, 0.8, [-0.2j, 0.0])]]]
    W = WeightFamily.standard(2, 1, g, h)
    C = np.array([[0.0, 0.2j], [-0.2j, 0.1]])
    return QWeightSpec(unital_psi(W, C), W)


def rank_one_m2():
    """q = 1, m = 2 inside C^3; h lives on the third coordinate."""
    g = [[Atom(-0.6, 1.0, [1.0, 0.5])], [Atom(-0.75, 0.8, [0.2j, 1.0])]]
    h = [[[Atom(1.0, 0.7, [0.0, 0.0, 0.4])]], [[]]]
    W = WeightFamily.standard(1, 2, g, h, p=3)
    return QWeightSpec(unital_psi(W), W)


def ambient_q2_nonunital():
    """p = 3, q = 2, m = 1, psi strictly above the unital choice."""
    g = [[Atom(-0.8, 1.2, [1.0])]]
    h = [[[Atom(1.0, 1.0, [0.0, 0.1, 0.3])], [Atom(1.0, 1.0, [-0.1, 0.0, 0.2j])]]]
    W = WeightFamily.standard(2, 1, g, h, p=3)
    psi = unital_psi(W) + 0.5 * SuperOperator.identity(2)
    return QWeightSpec(psi, W)


def square_integrable_difference():
    """g_1 - g_2 = x^1/2 e^-x is square integrable: not strictly infinite."""
    g = [[Atom(-0.5, 0.5, [1.0]), Atom(0.5, 1.0, [1.0])], [Atom(-0.5, 0.5, [1.0])]]
    W = WeightFamily.standard(1, 1, g)
    return QWeightSpec(unital_psi(W), W)


def divergent_along_e1():
    """m = 2, divergence only in the e_1 direction."""
    g = [[Atom(-0.5, 0.5, [1.0, 0.0]), Atom(0.5, 1.0, [0.0, 1.0])]]
    W = WeightFamily.standard(1, 2, g)
    return QWeightSpec(unital_psi(W), W)


def strictly_negative_q2():
    """psi + rho Lambda~ strictly conditionally negative (internal part -K)."""
    W = WeightFamily.standard(2, 1, [[Atom(-0.8, 1.0, [1.0])]])
    K = 0.2 * SuperOperator.sandwich(np.array([[0.0, 1.0], [1.0, 0.0]]))
    return QWeightSpec(unital_psi(W, extra=K), W)


def non_cp_inverse_q2():
    """psi = iota + Tr(.) I: its inverse iota - Tr(.)I/3 is not CP."""
    W = WeightFamily.standard(2, 1, [[Atom(-0.8, 1.0, [1.0])]])
    psi = SuperOperator.identity(2) + SuperOperator.trace_times(np.eye(2), 2)
    return QWeightSpec(psi, W)


VALID = {
    "scalar-rank-one": scalar_rank_one,
    "full-range-q2": full_range_q2,
    "coupled-q2": coupled_q2,
    "rank-one-m2": rank_one_m2,
    "ambient-q2-nonunital": ambient_q2_nonunital,
}

IMPURE = {
    "square-integrable-difference": square_integrable_difference,
    "divergent-along-e1": divergent_along_e1,
    "strictly-negative-q2": strictly_negative_q2,
}

"""Shared brute-force oracles: tiny-n enumerations the closed forms are
checked against."""

from itertools import product

import pytest

from rcdistill.analytic import twirl_weights

LETTERS = "IXYZ"


def all_pauli_strings(n: int):
    return ["".join(p) for p in product(LETTERS, repeat=n)]


def twirled_probability(pauli: str, f: float) -> float:
    """Probability of one error pattern after the full-twirl collapse."""
    phi_weight, per_pauli = twirl_weights(f, len(pauli))
    return phi_weight if set(pauli) <= {"I"} else per_pauli


def enumerate_passive(n: int, m: int, f: float) -> tuple[float, float]:
    """Acceptance statistics by enumerating all 4^n twirled error patterns:
    accept iff the first m slots carry only I/Z, accept-and-ideal iff the
    last k slots are additionally all I."""
    p_accept = 0.0
    p_joint = 0.0
    for pauli in all_pauli_strings(n):
        prob = twirled_probability(pauli, f)
        measured, kept = pauli[:m], pauli[m:]
        if any(ch in "XY" for ch in measured):
            continue
        p_accept += prob
        if set(kept) <= {"I"}:
            p_joint += prob
    return p_accept, p_joint


def depolarized_probability(pauli: str, epsilon: float) -> float:
    """IID per-slot error probability of one pattern."""
    prob = 1.0
    for ch in pauli:
        prob *= (1.0 - epsilon) if ch == "I" else epsilon / 3.0
    return prob


@pytest.fixture(scope="session")
def pauli_strings_3():
    return {n: all_pauli_strings(n) for n in (1, 2, 3)}

"""Shared oracles and the acceptance-criteria report hook."""

import itertools

import numpy as np

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion, capture-proof."""
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def expected_edge_mix_by_enumeration(labels, edges, confusion):
    """Brute-force oracle: expected measured edge-type shares.

    Enumerates every predicted-label assignment of the graph, weights it
    by the product of per-node confusion probabilities, and accumulates
    the edge-type shares. Independent of the dyadic closed form.
    """
    labels = list(labels)
    col = {
        0: (confusion.a_given_a, confusion.b_given_a),
        1: (confusion.a_given_b, confusion.b_given_b),
    }
    total = np.zeros(3)
    for assignment in itertools.product((0, 1), repeat=len(labels)):
        prob = 1.0
        for true, pred in zip(labels, assignment):
            prob *= col[true][pred]
        if prob == 0.0:
            continue
        counts = np.zeros(3)
        for u, v in edges:
            counts[assignment[u] + assignment[v]] += 1
        total += prob * counts / len(edges)
    return total

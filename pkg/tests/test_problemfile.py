import io
from pathlib import Path

import numpy as np
import pytest

from holderbvp.errors import DimensionError, ParseError
from holderbvp.norms import holder_norm
from holderbvp.grid import sample
from holderbvp.problemfile import parse_problem, parse_problem_text, write_problem
from holderbvp.solver import solve

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"

MINIMAL = """
[interval]
a = 0.0
b = 1.0

[space]
n = 0
alpha = 0.0
m = 1

[system]
A = [["1"]]
f = ["0"]

[boundary]
betas = [[["1"]]]

[data]
q = ["1"]
"""


class TestParsing:
    def test_minimal_cauchy_solves_to_exponential(self):
        fam = parse_problem_text(MINIMAL)
        assert fam.m == 1 and fam.n == 0 and fam.alpha == 0.0
        s = solve(fam.instantiate(0.0))
        exact = sample("exp(-t)", fam.interval, s.y.N, 1)
        assert holder_norm(s.y - exact, (1, 0.0)) <= 1e-7

    def test_missing_q_block_named(self):
        broken = MINIMAL.replace('q = ["1"]', "")
        with pytest.raises(ParseError, match="q"):
            parse_problem_text(broken)

    def test_wrong_matrix_shape(self):
        broken = MINIMAL.replace('A = [["1"]]', 'A = [["1", "0", "0"], ["0", "1", "0"]]')
        with pytest.raises(DimensionError, match="system.A"):
            parse_problem_text(broken)

    def test_beta_count_checked(self):
        broken = MINIMAL.replace('betas = [[["1"]]]', 'betas = [[["1"]], [["0"]]]')
        with pytest.raises(DimensionError, match="betas"):
            parse_problem_text(broken)

    def test_bad_expression_located(self):
        broken = MINIMAL.replace('A = [["1"]]', 'A = [["1 +"]]')
        with pytest.raises(ParseError, match="system.A"):
            parse_problem_text(broken)

    def test_invalid_toml(self):
        with pytest.raises(ParseError, match="TOML"):
            parse_problem_text("[interval\na = 0")

    def test_unknown_limit_keys_rejected(self):
        broken = MINIMAL + '\n[limit]\nbogus = [["1"]]\n'
        with pytest.raises(ParseError, match="bogus"):
            parse_problem_text(broken)

    def test_missing_file(self):
        with pytest.raises(ParseError):
            parse_problem("/nonexistent/problem.toml")


class TestRepositoryFiles:
    @pytest.mark.parametrize("name", sorted(p.name for p in PROBLEMS.glob("*.toml")))
    def test_parses(self, name):
        fam = parse_problem(PROBLEMS / name)
        fam.instantiate(0.0)  # limit instance always constructible

    @pytest.mark.parametrize("name", sorted(p.name for p in PROBLEMS.glob("*.toml")))
    def test_round_trip_identity(self, name):
        fam = parse_problem(PROBLEMS / name)
        buf = io.StringIO()
        write_problem(fam, buf)
        again = parse_problem_text(buf.getvalue())
        assert again.source == fam.source
        for row_a, row_b in zip(fam.A, again.A):
            assert row_a == row_b
        assert fam.q == again.q


class TestInstantiation:
    def test_eps_binding(self):
        text = MINIMAL.replace('A = [["1"]]', 'A = [["1 + eps"]]')
        fam = parse_problem_text(text)
        inst = fam.instantiate(0.25)
        assert inst.A[0][0].eval(0.0) == 1.25

    def test_limit_override_used_at_zero(self):
        fam = parse_problem(PROBLEMS / "osc_coefficient.toml")
        assert fam.instantiate(0.0).A[0][0].eval(0.5) == 0.0
        assert fam.instantiate(0.1).A[0][0].eval(0.5) == pytest.approx(np.sin(5.0))

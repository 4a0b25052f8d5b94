"""Worked applications: the two-state treatment split, the two-urn
comparison, certainty-equivalent elicitation, exponential-tilt pricing,
the shrinkage aggregate, the demonstration reports, and the scenario
file loader.

Closed forms are derived independently in the test bodies (the treatment
FOC, the tilt algebra, the shrinkage weights) and frozen where the
arithmetic is long.
"""

import dataclasses
import json
import math

import numpy as np
import pytest

from robagg import (
    Dist,
    EstimationInput,
    SCENARIO_VERSION,
    StateSpace,
    asdf,
    demo_dictator,
    demo_invariance,
    ellsberg_run,
    estimate_parameters,
    estimation_forward_model,
    james_stein_wle,
    kl,
    load_scenario,
    multiplier_value,
    sdf_project,
    treatment_solve,
)
from robagg.errors import (
    DimensionMismatch,
    InconsistentInputs,
    InputError,
    NoFosdOrder,
    NoRoot,
    SchemaError,
    TargetOutOfRange,
    TooFewSignals,
    WeightSumError,
)

from conftest import fosd_chain, make_space


# ---------------------------------------------------------------------------
# treatment allocation
# ---------------------------------------------------------------------------

class TestTreatment:
    # with welfare rows r0, r1 the blended utility is
    # u0(b) = (1-b) r0 + b r1 and the interior FOC of the multiplier
    # objective under belief (mu, 1-mu) solves in closed form

    @pytest.mark.parametrize("lam", [0.2, 0.4, 0.6, 0.8, 1.2])
    @pytest.mark.parametrize("mu", [0.05, 0.10, 0.15, 0.20, 0.25])
    def test_closed_form_grid(self, lam, mu):
        beta, value = treatment_solve([[2.0, 2.0], [0.0, 3.0]], lam, mu)
        want = (lam / 3.0) * math.log((1.0 - mu) / (2.0 * mu))
        want = min(1.0, max(0.0, want))
        assert beta == pytest.approx(want, abs=1e-6)
        q0 = Dist(StateSpace(("s1", "s2")), (mu, 1.0 - mu))
        u0 = ((1 - beta) * 2.0, (1 - beta) * 2.0 + beta * 3.0)
        assert value == pytest.approx(
            multiplier_value(u0, q0, lam), abs=1e-9
        )

    @pytest.mark.parametrize("lam", [0.3, 0.9])
    @pytest.mark.parametrize("mu", [0.1, 0.2])
    def test_closed_form_second_table(self, lam, mu):
        beta, _ = treatment_solve([[2.0, 2.0], [1.0, 4.0]], lam, mu)
        want = (lam / 3.0) * math.log(2.0 * (1.0 - mu) / mu)
        want = min(1.0, max(0.0, want))
        assert beta == pytest.approx(want, abs=1e-6)

    def test_pessimistic_belief_stays_out(self):
        # mu past 1/3 makes the risky arm unattractive at any caution
        beta, value = treatment_solve([[2.0, 2.0], [0.0, 3.0]], 0.5, 0.45)
        assert beta == 0.0
        assert value == pytest.approx(2.0, abs=1e-9)

    def test_infinite_lambda_goes_all_in(self):
        mu = 0.2
        beta, value = treatment_solve([[2.0, 2.0], [0.0, 3.0]], math.inf, mu)
        assert beta == 1.0
        assert value == pytest.approx((1.0 - mu) * 3.0, abs=1e-9)

    def test_validation(self):
        with pytest.raises(InputError):
            treatment_solve([[1.0, 2.0]], 1.0, 0.5)
        with pytest.raises(InputError):
            treatment_solve([[1.0, math.nan], [0.0, 3.0]], 1.0, 0.5)
        with pytest.raises(InputError):
            treatment_solve([[2.0, 2.0], [0.0, 3.0]], 1.0, 0.0)
        with pytest.raises(InputError):
            treatment_solve([[2.0, 2.0], [0.0, 3.0]], 1.0, 1.0)


# ---------------------------------------------------------------------------
# the two-urn comparison
# ---------------------------------------------------------------------------

class TestEllsberg:
    def test_symmetric_references_hand_value(self):
        rep = ellsberg_run(1.0, 0.9, 0.1, 0.5)
        want = -math.log(0.5 * math.exp(-1.0) + 0.5)
        assert rep.values["fR"] == pytest.approx(want, abs=1e-12)
        assert rep.values["fB"] == pytest.approx(want, abs=1e-12)
        assert rep.values["piR"] == 0.5
        assert rep.bets_indifferent
        assert rep.lotteries_indifferent
        assert rep.lottery_strictly_preferred
        assert rep.ranking == "piR ~ piB > fR ~ fB"

    @pytest.mark.parametrize("lams", [(0.5, 1.0), (1.0, 5.0)])
    def test_caution_orders_the_bet_values(self, lams):
        lo, hi = lams
        v_lo = ellsberg_run(lo, 0.9, 0.1, 0.5).values["fR"]
        v_hi = ellsberg_run(hi, 0.9, 0.1, 0.5).values["fR"]
        assert v_lo < v_hi < 0.5

    def test_asymmetric_mixture(self):
        # q_red = 0.5*0.9 + 0.5*0.3 = 0.6 favours the red bet
        rep = ellsberg_run(1.0, 0.9, 0.3, 0.5)
        assert rep.values["fR"] > rep.values["fB"]
        assert not rep.bets_indifferent
        assert rep.ranking.startswith("piR ~ piB > fR")

    def test_infinite_lambda_collapses_everything(self):
        rep = ellsberg_run(math.inf, 0.9, 0.1, 0.5)
        assert rep.values["fR"] == pytest.approx(0.5, abs=1e-15)
        assert rep.values["fB"] == pytest.approx(0.5, abs=1e-15)
        assert rep.bets_indifferent
        assert not rep.lottery_strictly_preferred
        assert rep.ranking == "piR ~ piB ~ fR ~ fB"

    def test_validation(self):
        with pytest.raises(InputError):
            ellsberg_run(1.0, 1.2, 0.1, 0.5)
        with pytest.raises(InputError):
            ellsberg_run(1.0, 0.9, -0.1, 0.5)
        with pytest.raises(InputError):
            ellsberg_run(1.0, 0.9, 0.1, 2.0)


# ---------------------------------------------------------------------------
# elicitation from certainty equivalents
# ---------------------------------------------------------------------------

class TestEstimation:
    PARAMS = (0.3, 0.6, 0.4, 2.0)

    def test_forward_model_frozen_values(self):
        inp = estimation_forward_model(*self.PARAMS)
        assert inp.ce_lottery[0] == pytest.approx(
            47.43352502606993, abs=1e-9
        )
        assert inp.ce_lottery[1] == pytest.approx(
            44.84871804838281, abs=1e-9
        )
        assert inp.ce_social_lottery == pytest.approx(
            47.015844195498424, abs=1e-9
        )
        assert inp.ce_ambiguous == pytest.approx(
            16.09678292240142, abs=1e-9
        )

    def test_round_trip(self):
        phi1, phi2, beta1, lam = self.PARAMS
        est = estimate_parameters(estimation_forward_model(*self.PARAMS))
        assert est.phi_hats[0] == pytest.approx(phi1, abs=1e-6)
        assert est.phi_hats[1] == pytest.approx(phi2, abs=1e-6)
        assert est.beta_hats[0] == pytest.approx(beta1, abs=1e-6)
        assert est.beta_hats[1] == pytest.approx(1.0 - beta1, abs=1e-6)
        assert est.lambda_hat == pytest.approx(lam, rel=1e-5)

    def test_round_trip_other_corner(self):
        est = estimate_parameters(
            estimation_forward_model(0.05, 0.85, 0.9, 0.3)
        )
        assert est.phi_hats[0] == pytest.approx(0.05, abs=1e-6)
        assert est.phi_hats[1] == pytest.approx(0.85, abs=1e-6)
        assert est.beta_hats[0] == pytest.approx(0.9, abs=1e-6)
        assert est.lambda_hat == pytest.approx(0.3, rel=1e-5)

    def test_risk_neutral_curvature_is_exact_zero(self):
        inp = estimation_forward_model(0.0, 0.4, 0.5, 1.0)
        assert inp.ce_lottery[0] == pytest.approx(50.0, abs=1e-9)
        est = estimate_parameters(inp)
        assert est.phi_hats[0] == 0.0

    def test_ambiguity_neutral_reports_infinite_lambda(self):
        inp = estimation_forward_model(0.3, 0.6, 0.4, math.inf)
        assert inp.ce_ambiguous == pytest.approx(
            inp.ce_social_lottery, abs=1e-9
        )
        est = estimate_parameters(inp)
        assert est.lambda_hat == math.inf

    def test_ce_above_risk_neutral_has_no_root(self):
        base = estimation_forward_model(*self.PARAMS)
        bad = dataclasses.replace(base, ce_lottery=(55.0, base.ce_lottery[1]))
        with pytest.raises(NoRoot):
            estimate_parameters(bad)

    def test_ce_below_log_utility_has_no_root(self):
        # sqrt(w (w + stake)) - w = 41.42... at w = stake = 100
        base = estimation_forward_model(*self.PARAMS)
        bad = dataclasses.replace(base, ce_lottery=(41.0, base.ce_lottery[1]))
        with pytest.raises(NoRoot):
            estimate_parameters(bad)

    def test_ambiguous_ce_above_neutral_has_no_root(self):
        base = estimation_forward_model(*self.PARAMS)
        bad = dataclasses.replace(
            base, ce_ambiguous=base.ce_social_lottery + 1.0
        )
        with pytest.raises(NoRoot):
            estimate_parameters(bad)

    def test_ambiguous_ce_below_bracket_has_no_root(self):
        base = estimation_forward_model(*self.PARAMS)
        bad = dataclasses.replace(base, ce_ambiguous=1e-4)
        with pytest.raises(NoRoot):
            estimate_parameters(bad)

    def test_social_ce_outside_the_agents_is_inconsistent(self):
        base = estimation_forward_model(*self.PARAMS)
        bad = dataclasses.replace(base, ce_social_lottery=49.0)
        with pytest.raises(InconsistentInputs):
            estimate_parameters(bad)

    def test_identical_agents_cannot_identify_beta(self):
        base = estimation_forward_model(0.4, 0.4, 0.5, 1.0)
        shifted = dataclasses.replace(
            base, ce_social_lottery=base.ce_lottery[0] + 0.5
        )
        with pytest.raises(InconsistentInputs):
            estimate_parameters(shifted)

    def test_input_validation(self):
        with pytest.raises(InputError):
            EstimationInput((100.0, 100.0), (47.0, 45.0), 46.0, 16.0, stake=0.0)
        with pytest.raises(InputError):
            EstimationInput((-1.0, 100.0), (47.0, 45.0), 46.0, 16.0)
        with pytest.raises(InputError):
            EstimationInput((100.0, 100.0), (0.0, 45.0), 46.0, 16.0)
        with pytest.raises(InputError):
            EstimationInput((100.0, 100.0), (47.0, 45.0), 120.0, 16.0)


# ---------------------------------------------------------------------------
# exponential-tilt pricing
# ---------------------------------------------------------------------------

class TestAsdf:
    def _space(self):
        return StateSpace(("down", "up"))

    def test_hand_premium(self):
        q0 = Dist(self._space(), (0.5, 0.5))
        res = asdf(q0, (0.0, 1.0), 1.0, 1.0, (0.0, 1.0), (1.0, 1.0))
        # tilt = (e, 1)/(1+e); pre-price = 1/(1+e)
        assert res.pre_price == pytest.approx(1.0 / (1.0 + math.e), abs=1e-12)
        assert res.premium == pytest.approx(
            0.5 - 1.0 / (1.0 + math.e), abs=1e-12
        )
        assert res.premium == pytest.approx(0.2310585786300049, abs=1e-12)
        assert np.allclose(
            res.tilt.probs,
            (math.e / (1.0 + math.e), 1.0 / (1.0 + math.e)),
        )
        assert np.allclose(res.post_prices.values, (0.0, 1.0))

    def test_constant_continuation_kills_the_premium(self):
        q0 = Dist(self._space(), (0.3, 0.7))
        res = asdf(q0, (2.5, 2.5), 0.7, 1.3, (1.0, 4.0), (0.9, 1.1))
        assert res.premium == 0.0
        assert np.array_equal(res.tilt.probs, q0.probs)

    def test_infinite_lambda_kills_the_premium(self):
        q0 = Dist(self._space(), (0.3, 0.7))
        res = asdf(q0, (0.0, 5.0), math.inf, 1.0, (1.0, 4.0), (0.9, 1.1))
        assert res.premium == 0.0
        assert np.array_equal(res.tilt.probs, q0.probs)

    def test_huge_lambda_premium_vanishes(self):
        q0 = Dist(self._space(), (0.5, 0.5))
        res = asdf(q0, (0.0, 1.0), 1e6, 1.0, (0.0, 1.0), (1.0, 1.0))
        assert abs(res.premium) <= 1e-4

    def test_comonotone_news_earns_a_premium(self):
        rng = np.random.default_rng(53)
        for _ in range(40):
            S = int(rng.integers(2, 6))
            space = make_space(S)
            q0 = Dist(space, rng.dirichlet(np.ones(S)) * 0.98 + 0.02 / S)
            cont = np.sort(rng.normal(size=S))
            post = np.sort(rng.uniform(0.0, 2.0, size=S))
            ratio = np.ones(S)
            res = asdf(q0, cont, float(rng.uniform(0.3, 3.0)),
                       float(rng.uniform(0.2, 2.0)), post, ratio)
            assert res.premium >= -1e-10

    def test_validation(self):
        q0 = Dist(self._space(), (0.5, 0.5))
        with pytest.raises(InputError):
            asdf(q0, (0.0, 1.0), -1.0, 1.0, (0.0, 1.0), (1.0, 1.0))
        with pytest.raises(InputError):
            asdf(q0, (0.0, 1.0), math.nan, 1.0, (0.0, 1.0), (1.0, 1.0))
        with pytest.raises(InputError):
            asdf(q0, (0.0, 1.0), 1.0, 0.0, (0.0, 1.0), (1.0, 1.0))
        with pytest.raises(InputError):
            asdf(q0, (0.0, 1.0), 1.0, math.inf, (0.0, 1.0), (1.0, 1.0))
        with pytest.raises(DimensionMismatch):
            asdf(q0, (0.0, 1.0, 2.0), 1.0, 1.0, (0.0, 1.0), (1.0, 1.0))
        with pytest.raises(InputError):
            asdf(q0, (0.0, math.inf), 1.0, 1.0, (0.0, 1.0), (1.0, 1.0))


class TestSdfProject:
    def _coin(self):
        return Dist(StateSpace(("a", "b")), (0.5, 0.5))

    def test_hand_instance(self):
        # E_tilt = 2 t_b = 0.5 forces exp(-2/ell) = 1/3
        tilt, ell = sdf_project(self._coin(), (0.0, 2.0), 0.5)
        assert ell == pytest.approx(2.0 / math.log(3.0), abs=1e-10)
        assert ell == pytest.approx(1.8204784532536746, abs=1e-10)
        assert np.allclose(tilt.probs, (0.75, 0.25), atol=1e-12)

    def test_target_at_reference_mean_returns_no_tilt(self):
        q0 = self._coin()
        tilt, ell = sdf_project(q0, (0.0, 2.0), 1.0)
        assert tilt is q0
        assert ell == math.inf

    def test_target_above_mean_needs_negative_ell(self):
        tilt, ell = sdf_project(self._coin(), (0.0, 2.0), 1.5)
        assert ell == pytest.approx(-2.0 / math.log(3.0), abs=1e-10)
        assert np.allclose(tilt.probs, (0.25, 0.75), atol=1e-12)

    def test_pricing_identity_random(self):
        rng = np.random.default_rng(59)
        for _ in range(60):
            S = int(rng.integers(2, 7))
            space = make_space(S)
            q0 = Dist(space, rng.dirichlet(np.ones(S)) * 0.9 + 0.1 / S)
            v = rng.normal(scale=3.0, size=S)
            if v.max() - v.min() < 1e-3:
                continue
            target = float(rng.uniform(v.min() + 1e-3, v.max() - 1e-3))
            tilt, ell = sdf_project(q0, v, target)
            assert float(tilt.probs @ v) == pytest.approx(target, abs=1e-10)
            if math.isfinite(ell):
                # the tilt really is the exponential family member
                w = q0.probs * np.exp(-v / ell)
                assert np.allclose(tilt.probs, w / w.sum(), atol=1e-10)

    def test_dead_states_stay_dead(self):
        space = make_space(3)
        q0 = Dist(space, (0.5, 0.5, 0.0))
        tilt, _ = sdf_project(q0, (0.0, 2.0, 99.0), 0.5)
        assert tilt.probs[2] == 0.0
        assert np.allclose(tilt.probs[:2], (0.75, 0.25), atol=1e-12)

    def test_target_out_of_range(self):
        with pytest.raises(TargetOutOfRange):
            sdf_project(self._coin(), (0.0, 2.0), 2.0)
        with pytest.raises(TargetOutOfRange):
            sdf_project(self._coin(), (0.0, 2.0), -0.5)

    def test_validation(self):
        with pytest.raises(InputError):
            sdf_project(self._coin(), (0.0, 2.0), math.nan)
        with pytest.raises(DimensionMismatch):
            sdf_project(self._coin(), (0.0, 2.0, 4.0), 0.5)


# ---------------------------------------------------------------------------
# the shrinkage aggregate
# ---------------------------------------------------------------------------

class TestJamesStein:
    def test_hand_value(self):
        assert james_stein_wle([1, 2, 3, 4, 5]) == pytest.approx(
            32.0 / 21.0, abs=1e-14
        )

    def test_three_advisors_return_the_own_signal(self):
        assert james_stein_wle([7.0, 1.0, 2.0, 3.0]) == 7.0

    def test_preset_is_a_weighted_sum(self):
        # est = (1-B) s0 + B sbar with the 1/n grand mean, so the implied
        # weights are (1 - B + B/n, B/n, ..., B/n) and sum to 1 + B/n
        s = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        n = s.size - 1
        sbar = s.sum() / n
        b = (n - 3) / np.sum((s[1:] - sbar) ** 2)
        w = np.full(s.size, b / n)
        w[0] += 1.0 - b
        assert james_stein_wle(s) == pytest.approx(float(w @ s), abs=1e-14)
        assert w.sum() == pytest.approx(1.0 + b / n, abs=1e-14)

    def test_more_advisors_shrink_harder(self):
        wide = [10.0, 1.0, 1.2, 0.8, 1.1, 0.9]
        est = james_stein_wle(wide)
        sbar = sum(wide) / 5.0
        assert abs(est - sbar) < abs(10.0 - sbar)

    def test_explicit_weights(self):
        got = james_stein_wle([1.0, 2.0, 3.0], weights=[0.2, 0.3, 0.5])
        assert got == pytest.approx(2.3, abs=1e-14)

    def test_identical_advisors_at_the_floor_count(self):
        # B is pinned to zero at n = 3, so zero spread is harmless there
        assert james_stein_wle([9.0, 5.0, 5.0, 5.0]) == 9.0

    def test_errors(self):
        with pytest.raises(WeightSumError):
            james_stein_wle([1.0, 2.0], weights=[0.5, 0.6])
        with pytest.raises(DimensionMismatch):
            james_stein_wle([1.0, 2.0, 3.0], weights=[0.5, 0.5])
        with pytest.raises(TooFewSignals):
            james_stein_wle([1.0, 2.0, 3.0])
        with pytest.raises(InputError):
            james_stein_wle([])
        with pytest.raises(InputError):
            james_stein_wle([1.0, math.inf, 2.0, 3.0, 4.0])
        with pytest.raises(InputError):
            james_stein_wle([0.0, 5.0, 5.0, 5.0, 5.0])  # zero spread, n = 4


# ---------------------------------------------------------------------------
# demonstration reports
# ---------------------------------------------------------------------------

class TestDemoInvariance:
    def _beliefs(self):
        space = make_space(3)
        return [
            Dist(space, (0.6, 0.3, 0.1)),
            Dist(space, (0.2, 0.5, 0.3)),
            Dist(space, (0.1, 0.2, 0.7)),
        ]

    @pytest.mark.parametrize("lam", [0.5, 1.0, 5.0, math.inf])
    def test_mixtures_never_undercut(self, lam):
        rep = demo_invariance((1.0, -0.4, 0.3), self._beliefs(), lam)
        assert rep.max_gap == 0.0
        assert rep.passes
        assert rep.minimizer_is_generator
        assert rep.samples == 1000

    def test_generator_value_matches_direct_evaluation(self):
        beliefs = self._beliefs()
        rep = demo_invariance((1.0, -0.4, 0.3), beliefs, 0.8, samples=10)
        want = min(
            multiplier_value((1.0, -0.4, 0.3), p, 0.8) for p in beliefs
        )
        assert rep.generator_value == pytest.approx(want, abs=1e-12)

    def test_deterministic_in_the_seed(self):
        a = demo_invariance((1.0, 0.0, -1.0), self._beliefs(), 1.0, seed=7)
        b = demo_invariance((1.0, 0.0, -1.0), self._beliefs(), 1.0, seed=7)
        assert a == b

    def test_zero_samples(self):
        rep = demo_invariance((1.0, 0.0, -1.0), self._beliefs(), 1.0, samples=0)
        assert rep.max_gap == 0.0
        assert rep.passes

    def test_validation(self):
        with pytest.raises(InputError):
            demo_invariance((1.0, 0.0), [], 1.0)
        with pytest.raises(InputError):
            demo_invariance(
                (1.0, 0.0, -1.0), self._beliefs(), 1.0, samples=-3
            )


class TestDemoDictator:
    def test_chain_selection_and_dominance(self):
        rng = np.random.default_rng(61)
        chain = fosd_chain(rng, make_space(4), 4)
        rep = demo_dictator(chain, lam=1.0, n_acts=15, seed=3)
        assert rep.selected_index == 3
        assert rep.selected_name == "candidate-3"
        assert rep.dominance_ok
        assert rep.values.shape == (4, 15)
        assert rep.act_utilities.shape == (15, 4)
        assert np.all(np.diff(rep.act_utilities, axis=1) >= 0.0)
        assert np.all(rep.values[3] >= rep.values - 1e-10)

    def test_names(self):
        rng = np.random.default_rng(67)
        chain = fosd_chain(rng, make_space(3), 3)
        rep = demo_dictator(chain, names=("low", "mid", "high"), n_acts=4)
        assert rep.selected_name == "high"
        with pytest.raises(DimensionMismatch):
            demo_dictator(chain, names=("a", "b"))

    def test_incomparable_candidates_raise(self):
        space = make_space(3)
        a = Dist(space, (0.5, 0.0, 0.5))
        b = Dist(space, (0.2, 0.6, 0.2))
        with pytest.raises(NoFosdOrder):
            demo_dictator([a, b])

    def test_validation(self):
        rng = np.random.default_rng(71)
        chain = fosd_chain(rng, make_space(3), 2)
        with pytest.raises(InputError):
            demo_dictator(chain, n_acts=0)


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------

def _write(tmp_path, doc, name="scn.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


class TestLoadScenario:
    def _minimal(self, **over):
        doc = {
            "version": SCENARIO_VERSION,
            "command": "evaluate",
            "states": ["s1", "s2"],
            "planner": {
                "lambda": 1.5,
                "structured": {"kind": "singleton", "belief": [0.4, 0.6]},
            },
            "command_params": {"u0": [1.0, 0.0]},
        }
        doc.update(over)
        return doc

    def test_minimal_document(self, tmp_path):
        scn = load_scenario(_write(tmp_path, self._minimal()))
        assert scn.command == "evaluate"
        assert scn.lam == 1.5
        assert scn.states is not None and len(scn.states) == 2
        assert scn.structured is not None
        assert scn.command_params == {"u0": [1.0, 0.0]}
        assert scn.profile is None

    def test_lambda_inf_string(self, tmp_path):
        doc = self._minimal()
        doc["planner"]["lambda"] = "inf"
        scn = load_scenario(_write(tmp_path, doc))
        assert scn.lam == math.inf

    def test_agents_build_a_profile(self, tmp_path):
        doc = {
            "version": SCENARIO_VERSION,
            "command": "aggregate",
            "states": ["s1", "s2"],
            "outcomes": ["x", "y"],
            "agents": [
                {
                    "name": "ann",
                    "utility": {"x": 1.0, "y": 0.0},
                    "reference": [0.6, 0.4],
                    "radius": 0.1,
                },
                {
                    "name": "bob",
                    "utility": {"x": 0.0, "y": 2.0},
                    "reference": [0.3, 0.7],
                    "radius": 0.2,
                },
            ],
            "acts": {"f": ["x", "y"]},
            "planner": {
                "beta": [1.0, 0.5],
                "gamma": 0.25,
                "structured": {"kind": "balls"},
            },
        }
        scn = load_scenario(_write(tmp_path, doc))
        assert scn.profile is not None
        assert [a.name for a in scn.profile.agents] == ["ann", "bob"]
        assert np.allclose(scn.profile.beta, [1.0, 0.5])
        assert scn.gamma == 0.25
        assert scn.structured is not None

    def test_default_beta_is_uniform(self, tmp_path):
        doc = {
            "version": SCENARIO_VERSION,
            "command": "aggregate",
            "states": ["s1", "s2"],
            "outcomes": ["x", "y"],
            "agents": [
                {
                    "name": "ann",
                    "utility": {"x": 1.0, "y": 0.0},
                    "reference": [0.6, 0.4],
                    "radius": 0.1,
                },
                {
                    "name": "bob",
                    "utility": {"x": 0.0, "y": 2.0},
                    "reference": [0.3, 0.7],
                    "radius": 0.2,
                },
            ],
        }
        scn = load_scenario(_write(tmp_path, doc))
        assert np.allclose(scn.profile.beta, [0.5, 0.5])

    def test_missing_file(self, tmp_path):
        with pytest.raises(SchemaError):
            load_scenario(str(tmp_path / "nope.json"))

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(SchemaError):
            load_scenario(str(path))

    def test_bad_version(self, tmp_path):
        doc = self._minimal(version="robagg-scenario/999")
        with pytest.raises(SchemaError):
            load_scenario(_write(tmp_path, doc))

    def test_unknown_command(self, tmp_path):
        doc = self._minimal(command="transmogrify")
        with pytest.raises(SchemaError):
            load_scenario(_write(tmp_path, doc))

    def test_bad_lambda(self, tmp_path):
        doc = self._minimal()
        doc["planner"]["lambda"] = "sometimes"
        with pytest.raises(SchemaError):
            load_scenario(_write(tmp_path, doc))
        doc["planner"]["lambda"] = -2.0
        with pytest.raises(SchemaError):
            load_scenario(_write(tmp_path, doc))

    def test_agents_need_states_and_outcomes(self, tmp_path):
        doc = {
            "version": SCENARIO_VERSION,
            "command": "aggregate",
            "agents": [
                {
                    "name": "ann",
                    "utility": {"x": 1.0},
                    "reference": [0.6, 0.4],
                    "radius": 0.1,
                }
            ],
        }
        with pytest.raises(SchemaError):
            load_scenario(_write(tmp_path, doc))

    def test_utility_keys_must_match_outcomes(self, tmp_path):
        doc = {
            "version": SCENARIO_VERSION,
            "command": "aggregate",
            "states": ["s1", "s2"],
            "outcomes": ["x", "y"],
            "agents": [
                {
                    "name": "ann",
                    "utility": {"x": 1.0, "z": 0.0},
                    "reference": [0.6, 0.4],
                    "radius": 0.1,
                }
            ],
        }
        with pytest.raises(SchemaError):
            load_scenario(_write(tmp_path, doc))

    def test_act_with_undeclared_outcome(self, tmp_path):
        doc = {
            "version": SCENARIO_VERSION,
            "command": "aggregate",
            "states": ["s1", "s2"],
            "outcomes": ["x", "y"],
            "agents": [
                {
                    "name": "ann",
                    "utility": {"x": 1.0, "y": 0.0},
                    "reference": [0.6, 0.4],
                    "radius": 0.1,
                },
                {
                    "name": "bob",
                    "utility": {"x": 0.0, "y": 2.0},
                    "reference": [0.3, 0.7],
                    "radius": 0.2,
                },
            ],
            "acts": {"f": ["x", "w"]},
        }
        with pytest.raises(SchemaError):
            load_scenario(_write(tmp_path, doc))

    def test_balls_without_agents(self, tmp_path):
        doc = self._minimal()
        doc["planner"]["structured"] = {"kind": "balls"}
        with pytest.raises(SchemaError):
            load_scenario(_write(tmp_path, doc))

    def test_structured_hull_with_members(self, tmp_path):
        doc = self._minimal()
        doc["planner"]["structured"] = {
            "kind": "hull",
            "members": [[0.6, 0.4], [0.2, 0.8]],
        }
        scn = load_scenario(_write(tmp_path, doc))
        from robagg import HullOfFinite

        assert isinstance(scn.structured, HullOfFinite)

    def test_command_params_must_be_a_map(self, tmp_path):
        doc = self._minimal(command_params=[1, 2, 3])
        with pytest.raises(SchemaError):
            load_scenario(_write(tmp_path, doc))

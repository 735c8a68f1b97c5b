import numpy as np
import pytest

import episode_fitter
from episode_fitter import (FitOptions, SeriesSegment, fit_episode, fit_with_restarts, initial_guess,
                            residual_stats)
from errors import DegenerateSegment, FitFailed
from response_model import ResponseParams, evaluate
from synthetic_series import NoiseSpec, generate


def noiseless(params, n):
    return SeriesSegment(values=evaluate(params, np.arange(n, dtype=float)), label='noiseless')


def test_residual_stats_example():
    segment = SeriesSegment(values=[101.0])
    params = ResponseParams(f=0.5, lambda_plus=0.0, lambda_minus=0.0)
    assert residual_stats(segment, params) == (1.0, 1.0, 1.0, 1.0)


def test_residual_stats_matches_direct_sums():
    rng = np.random.default_rng(3)
    params = ResponseParams(f=0.6, lambda_plus=0.02, lambda_minus=-0.2)
    values = evaluate(params, np.arange(25.0)) * (1.0 + 0.01 * rng.standard_normal(25))
    srs, srm, rsrs, rsrm = residual_stats(SeriesSegment(values=values), params)

    expected_srs, expected_rsrs = 0.0, 0.0
    for t, d in enumerate(values):
        m = evaluate(params, t)
        expected_srs += (d - m) ** 2
        expected_rsrs += (100.0 * (d - m) / m) ** 2
    assert srs == pytest.approx(expected_srs, rel=1e-12)
    assert rsrs == pytest.approx(expected_rsrs, rel=1e-12)
    assert srm * 25 == pytest.approx(srs, rel=1e-12)
    assert rsrm * 25 == pytest.approx(rsrs, rel=1e-12)


def test_initial_guess_is_admissible(finland_like):
    guess = initial_guess(noiseless(finland_like, 40).values)
    assert 0.01 <= guess.f <= 0.99
    assert guess.lambda_minus < 0.0
    assert guess.lambda_plus > guess.lambda_minus
    assert guess.w0 == 100.0


def test_noiseless_fit_recovers_parameters():
    params = ResponseParams(f=0.5, lambda_plus=0.1, lambda_minus=-0.1)
    fit = fit_episode(noiseless(params, 40))
    assert fit.converged
    assert fit.params.f == pytest.approx(0.5, rel=1e-6)
    assert fit.params.lambda_plus == pytest.approx(0.1, rel=1e-6)
    assert fit.params.lambda_minus == pytest.approx(-0.1, rel=1e-6)
    assert fit.params.w0 == 100.0
    assert fit.srs < 1e-6
    assert fit.n == 40


def test_noiseless_fit_random_parameters():
    """
    Exact data is reproduced over the usual parameter ranges
    """
    rng = np.random.default_rng(2024)
    for _ in range(10):
        params = ResponseParams(f=rng.uniform(0.3, 0.9), lambda_plus=rng.uniform(0.005, 0.05),
                                lambda_minus=rng.uniform(-0.5, -0.05))
        fit = fit_with_restarts(noiseless(params, 60), 5)
        assert fit.params.f == pytest.approx(params.f, rel=1e-6), f'f not recovered for {params}'
        assert fit.params.lambda_plus == pytest.approx(params.lambda_plus, rel=1e-6)
        assert fit.params.lambda_minus == pytest.approx(params.lambda_minus, rel=1e-6)


def test_fit_reports_canonical_parameters(finland_like):
    fit = fit_with_restarts(noiseless(finland_like, 50), 5)
    assert fit.params.lambda_plus >= fit.params.lambda_minus
    assert -1.0 <= fit.params.lambda_minus <= 0.0
    assert 0.0 <= fit.params.f <= 1.0


def test_single_restart_equals_plain_fit(finland_like):
    segment = noiseless(finland_like, 40)
    plain = fit_episode(segment)
    restarted = fit_with_restarts(segment, 1)
    assert restarted.params == plain.params
    assert restarted.srs == plain.srs


def test_more_restarts_never_worse(finland_like):
    segment = generate(finland_like, NoiseSpec(nu=0.01, seed=5), 60)
    single = fit_with_restarts(segment, 1)
    many = fit_with_restarts(segment, 20)
    assert many.srs <= single.srs + 1e-12


def test_restarts_are_deterministic(finland_like):
    segment = generate(finland_like, NoiseSpec(nu=0.01, seed=5), 60)
    first = fit_with_restarts(segment, 5, FitOptions(seed=11))
    second = fit_with_restarts(segment, 5, FitOptions(seed=11))
    assert first.params == second.params


def test_noisy_fit_beats_generator(finland_like):
    segment = generate(finland_like, NoiseSpec(nu=0.005, seed=1), 200)
    fit = fit_with_restarts(segment, 5, FitOptions(free_w0=True))
    srs_truth, *_ = residual_stats(segment, finland_like)
    assert fit.srs <= srs_truth * (1.0 + 1e-9)


def test_noisy_fit_stays_close_to_generator(finland_like):
    recovered = 0
    for seed in range(5):
        fit = fit_with_restarts(generate(finland_like, NoiseSpec(nu=0.005, seed=seed), 200), 5)
        if abs(fit.params.f - 0.75) <= 0.02 and abs(fit.params.lambda_plus - 0.0125) <= 0.001:
            recovered += 1
    assert recovered >= 4


def test_fit_row_columns(finland_like):
    fit = fit_episode(noiseless(finland_like, 40))
    row = fit.row()
    assert list(row)[:10] == ['first', 'last', 'f', 'exp_lambda_plus', 'exp_lambda_minus',
                              'srs', 'srm', 'rsrs', 'rsrm', 'n']
    assert row['exp_lambda_plus'] == pytest.approx(np.exp(fit.params.lambda_plus))
    assert row['first'] == '0'
    assert row['last'] == '39'


def test_free_w0_fit(finland_like):
    fit = fit_episode(noiseless(finland_like, 40), FitOptions(free_w0=True))
    assert fit.params.w0 == pytest.approx(100.0, rel=1e-6)
    assert 'w0' in fit.std_errors


def test_standard_errors_halve_with_four_times_the_data():
    """
    Four times as many points over the same stretch of the curve halve the standard errors
    """
    coarse = ResponseParams(f=0.6, lambda_plus=0.02, lambda_minus=-0.2)
    fine = ResponseParams(f=0.6, lambda_plus=0.005, lambda_minus=-0.05)
    for seed in range(3):
        few = fit_with_restarts(generate(coarse, NoiseSpec(nu=0.005, seed=seed), 100), 5)
        many = fit_with_restarts(generate(fine, NoiseSpec(nu=0.005, seed=seed + 100), 400), 5)
        f_ratio = few.std_errors['f'] / many.std_errors['f']
        # rates of the dense series are a quarter of the coarse ones, so are their errors
        plus_ratio = few.std_errors['lambda_plus'] / (4.0 * many.std_errors['lambda_plus'])
        minus_ratio = few.std_errors['lambda_minus'] / (4.0 * many.std_errors['lambda_minus'])
        assert 1.4 <= f_ratio <= 2.6, f'seed {seed}'
        assert 1.4 <= plus_ratio <= 2.6, f'seed {seed}'
        assert 1.4 <= minus_ratio <= 2.6, f'seed {seed}'


def test_fast_decay_is_stopped_by_the_bound():
    params = ResponseParams(f=0.6, lambda_plus=0.02, lambda_minus=-3.0)
    fit = fit_episode(noiseless(params, 30))
    assert fit.converged
    assert fit.boundary_hit == frozenset({'lambda_minus'})
    assert fit.params.lambda_minus == pytest.approx(-1.0, abs=1e-6)
    assert fit.row()['boundary'] == 'lambda_minus'


def test_boundary_follows_swapped_labels(monkeypatch):
    """
    A fit that ends with the fast component in the lambda_plus slot reports the bound,
    and the errors, under the canonical names
    """
    segment = noiseless(ResponseParams(f=0.6, lambda_plus=-0.01, lambda_minus=-3.0), 30)

    monkeypatch.setattr(episode_fitter, 'initial_guess',
                        lambda values: ResponseParams(f=0.6, lambda_plus=-0.02, lambda_minus=-0.9))
    direct = fit_episode(segment)
    monkeypatch.setattr(episode_fitter, 'initial_guess',
                        lambda values: ResponseParams(f=0.4, lambda_plus=-0.9, lambda_minus=-0.02))
    swapped = fit_episode(segment)

    assert direct.boundary_hit == frozenset({'lambda_minus'})
    assert swapped.boundary_hit == frozenset({'lambda_minus'})
    assert swapped.params.lambda_plus > swapped.params.lambda_minus
    assert swapped.params.f == pytest.approx(direct.params.f, rel=1e-5)
    assert swapped.params.lambda_plus == pytest.approx(direct.params.lambda_plus, rel=1e-5)
    assert swapped.params.lambda_minus == pytest.approx(-1.0, abs=1e-6)
    for name in ('f', 'lambda_plus', 'lambda_minus'):
        assert swapped.std_errors[name] == pytest.approx(direct.std_errors[name], rel=1e-3), name


def test_short_segment_is_degenerate():
    with pytest.raises(DegenerateSegment):
        fit_episode(SeriesSegment(values=[100.0, 95.0, 97.0]))


def test_non_positive_values_are_degenerate():
    with pytest.raises(DegenerateSegment):
        fit_episode(SeriesSegment(values=[100.0, 95.0, -1.0, 97.0, 99.0]))


def test_degenerate_segment_is_a_fit_failure():
    assert issubclass(DegenerateSegment, FitFailed)


def test_zero_restarts_rejected(finland_like):
    with pytest.raises(ValueError):
        fit_with_restarts(noiseless(finland_like, 20), 0)


def test_segment_slice_and_normalization():
    segment = SeriesSegment(values=[200.0, 180.0, 190.0, 210.0], start_index=1990, scale=2.0)
    part = segment.slice(1, 3)
    assert part.start_index == 1991
    assert part.periods == ('1991', '1992')
    normalized = part.normalized()
    assert normalized.values[0] == 100.0
    np.testing.assert_allclose(normalized.values * normalized.scale, part.values * part.scale)

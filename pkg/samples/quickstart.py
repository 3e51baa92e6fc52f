# -*- coding: utf-8 -*-
from releasetrends import GeneratorConfig, generate, parse_snapshots
from releasetrends.datagen import AnalysisOutputs, validate_against_truth
from releasetrends.intervals import derive_all_releases, derive_releases
from releasetrends.lags import aggregate_lags, scan_history
from releasetrends.patterns import history_windows, tsne_embed, ward_cluster
from releasetrends.segmentation import segment_history

DEBUG = False
_print = print


def print(*args):
    if DEBUG:
        _print(*args)


# region generate
config = GeneratorConfig(
    n_apps=30,
    seed=11,
    rating_mode="daily",
    interval_mix=(0.0, 0.5, 0.5),
    positive_probability=1.0,
    purpose_effect=0.0,
    lag_days=4,
)
lines, truth = generate(config)
histories = parse_snapshots(lines)
# endregion generate

# region analyse
releases = derive_all_releases(histories)

breakpoints = {}
for history in histories:
    trend = segment_history(history)
    breakpoints[history.app_id] = [p.day for p in trend.turning_points]

lag_results = [scan_history(h) for h in histories if derive_releases(h)]
histogram = aggregate_lags(lag_results)

windows = []
for history in histories:
    windows += history_windows(history)
embedding = tsne_embed(windows, iterations=250, seed=config.seed)
clustering = ward_cluster(embedding.points, 2)
# endregion analyse

# region score
scorecard = validate_against_truth(
    AnalysisOutputs(
        run_id=truth.run_id,
        releases=releases,
        breakpoints=breakpoints,
        peak_lag=histogram.peak_lag,
        windows=windows,
        clustering=clustering,
    ),
    truth,
)
print(scorecard)
assert scorecard.release_recall == 1.0
assert scorecard.release_precision == 1.0
assert scorecard.lag_recovered
# endregion score

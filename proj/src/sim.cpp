#include "estkit/sim.hpp"

#include <cmath>
#include <limits>

namespace estkit {

namespace {

constexpr std::uint64_t kProcessStream = 0;
constexpr std::uint64_t kMeasurementStream = 1;

}  // namespace

std::string filter_name(FilterKind kind) {
    switch (kind) {
        case FilterKind::Lkf: return "lkf";
        case FilterKind::Ekf: return "ekf";
        case FilterKind::Ukf: return "ukf";
    }
    return "?";
}

std::optional<FilterKind> parse_filter_name(const std::string& name) {
    if (name == "lkf") return FilterKind::Lkf;
    if (name == "ekf") return FilterKind::Ekf;
    if (name == "ukf") return FilterKind::Ukf;
    return std::nullopt;
}

ExperimentConfig make_default_config() {
    ExperimentConfig cfg;
    cfg.x0_truth = (Vector(3) << 1e5, -6000.0, 2000.0).finished();
    cfg.belief0.mean = cfg.x0_truth;
    cfg.belief0.cov = (Vector(3) << 500.0, 2e4, 2.5e5).finished().asDiagonal();
    cfg.process_noise_stdev = (Vector(3) << 2.0, 5.0, 8.0).finished();
    return cfg;
}

Matrix process_noise_cov(ProcessNoiseForm form, const Vector& stdev, double dt) {
    require_finite(stdev, "process_noise_cov");
    if (form == ProcessNoiseForm::Rank1) {
        return dt * (stdev * stdev.transpose());
    }
    return dt * Matrix(stdev.array().square().matrix().asDiagonal());
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.steps < 2) {
        throw std::invalid_argument("ExperimentConfig: steps must be at least 2");
    }
    if (!(cfg.dt > 0.0)) {
        throw std::invalid_argument("ExperimentConfig: dt must be positive");
    }
    if (cfg.measurement_variance < 0.0) {
        throw std::invalid_argument("ExperimentConfig: measurement variance must be >= 0");
    }
    if (cfg.x0_truth.size() != 3 || cfg.belief0.mean.size() != 3 ||
        cfg.belief0.cov.rows() != 3 || cfg.belief0.cov.cols() != 3) {
        throw DimensionMismatch("ExperimentConfig: benchmark state has 3 entries");
    }
    if (cfg.process_noise_stdev.size() != 3 || (cfg.process_noise_stdev.array() < 0.0).any()) {
        throw std::invalid_argument("ExperimentConfig: process stdev entries must be >= 0");
    }
}

TruthData simulate_truth(const ExperimentConfig& cfg) {
    validate_config(cfg);
    NormalStream process(Splitmix64::substream(cfg.seed, kProcessStream));
    NormalStream meas(Splitmix64::substream(cfg.seed, kMeasurementStream));

    FallingBodyParams body = cfg.body;
    body.dt = cfg.dt;
    const double noise_scale = std::sqrt(cfg.dt);
    const double meas_sigma = std::sqrt(cfg.measurement_variance);

    TruthData data;
    data.states.reserve(cfg.steps);
    data.measurements.reserve(cfg.steps);
    data.states.push_back(cfg.x0_truth);
    data.measurements.push_back(cfg.x0_truth(0) + meas_sigma * meas.next());
    for (int k = 1; k < cfg.steps; ++k) {
        Vector w(3);
        for (int i = 0; i < 3; ++i) {
            w(i) = noise_scale * cfg.process_noise_stdev(i) * process.next();
        }
        data.states.push_back(falling_body_step(data.states.back(), body, w));
        data.measurements.push_back(data.states.back()(0) + meas_sigma * meas.next());
    }
    return data;
}

SampleMoments sample_moments(const std::vector<Vector>& samples) {
    if (samples.size() < 2) {
        throw std::invalid_argument("sample_moments: need at least 2 samples");
    }
    const auto n = static_cast<double>(samples.size());
    const Eigen::Index dim = samples.front().size();
    Vector mean = Vector::Zero(dim);
    for (const Vector& s : samples) {
        if (s.size() != dim) {
            throw DimensionMismatch("sample_moments: inconsistent sample dimension");
        }
        mean += s;
    }
    mean /= n;
    Matrix scatter = Matrix::Zero(dim, dim);
    Matrix raw = Matrix::Zero(dim, dim);
    for (const Vector& s : samples) {
        const Vector d = s - mean;
        scatter += d * d.transpose();
        raw += s * s.transpose();
    }
    return {mean, scatter / (n - 1.0), raw / n};
}

double FilterSeries::time_avg_mse() const {
    if (sq_err.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double sum = 0.0;
    for (double v : sq_err) {
        sum += v;
    }
    return sum / static_cast<double>(sq_err.size());
}

const FilterSeries* ExperimentResult::series(FilterKind kind) const {
    for (const auto& [k, s] : filters) {
        if (k == kind) {
            return &s;
        }
    }
    return nullptr;
}

bool ExperimentResult::any_diverged() const {
    for (const auto& [k, s] : filters) {
        if (s.diverged()) {
            return true;
        }
    }
    return false;
}

namespace {

// Runs one filter over the prepared measurements, capturing divergence.
template <typename Filter, typename StepFn>
FilterSeries run_series(Filter filter, const TruthData& data, const ExperimentConfig& cfg,
                        StepFn step) {
    FilterSeries series;
    for (int k = 1; k < cfg.steps; ++k) {
        const Vector z = Vector::Constant(1, data.measurements[k]);
        try {
            filter = step(filter, z);
        } catch (const FilterDivergence&) {
            series.jitter_count = filter.jitter_count;
            series.diverged_at = k;
            return series;
        }
        series.estimates.push_back(filter.belief.mean);
        series.covariances.push_back(filter.belief.cov);
        const double err = filter.belief.mean(0) - data.states[k](0);
        series.err_truth.push_back(err);
        series.err_meas.push_back(filter.belief.mean(0) - data.measurements[k]);
        series.sq_err.push_back(err * err);
    }
    series.jitter_count = filter.jitter_count;
    return series;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const TruthData data = simulate_truth(cfg);

    FallingBodyParams body = cfg.body;
    body.dt = cfg.dt;
    const Matrix q = process_noise_cov(cfg.q_form, cfg.process_noise_stdev, cfg.dt);
    const Matrix r = Matrix::Constant(1, 1, cfg.measurement_variance);
    const NonlinearModel model = make_falling_body_model(body, q, r);

    ExperimentResult result;
    for (int k = 1; k < cfg.steps; ++k) {
        result.step.push_back(k);
        result.truth.push_back(data.states[k]);
        result.measurements.push_back(data.measurements[k]);
    }
    for (FilterKind kind : cfg.filters) {
        FilterSeries series;
        switch (kind) {
            case FilterKind::Lkf:
                series = run_series(make_lkf(model, cfg.belief0), data, cfg,
                                    [](const LkfFilter& f, const Vector& z) {
                                        return lkf_step(f, z);
                                    });
                break;
            case FilterKind::Ekf:
                series = run_series(make_ekf(model, cfg.belief0), data, cfg,
                                    [](const EkfFilter& f, const Vector& z) {
                                        return ekf_step(f, z);
                                    });
                break;
            case FilterKind::Ukf:
                series = run_series(make_ukf(model, cfg.ukf_params, cfg.belief0), data, cfg,
                                    [](const UkfFilter& f, const Vector& z) {
                                        return ukf_step(f, z);
                                    });
                break;
        }
        result.filters.emplace_back(kind, std::move(series));
    }
    return result;
}

const FilterAggregate* MonteCarloResult::aggregate(FilterKind kind) const {
    for (const auto& [k, a] : filters) {
        if (k == kind) {
            return &a;
        }
    }
    return nullptr;
}

MonteCarloResult monte_carlo(const ExperimentConfig& cfg, int runs) {
    validate_config(cfg);
    if (runs < 1) {
        throw std::invalid_argument("monte_carlo: runs must be at least 1");
    }
    MonteCarloResult mc;
    mc.runs = runs;
    for (FilterKind kind : cfg.filters) {
        mc.filters.emplace_back(kind, FilterAggregate{});
    }
    for (int i = 0; i < runs; ++i) {
        ExperimentConfig run_cfg = cfg;
        run_cfg.seed = cfg.seed + static_cast<std::uint64_t>(i);
        const ExperimentResult result = run_experiment(run_cfg);
        for (auto& [kind, agg] : mc.filters) {
            const FilterSeries* series = result.series(kind);
            agg.jitter_total += series->jitter_count;
            if (series->diverged()) {
                ++agg.diverged;
                agg.per_run_mse.push_back(std::numeric_limits<double>::quiet_NaN());
            } else {
                ++agg.completed;
                agg.per_run_mse.push_back(series->time_avg_mse());
            }
        }
    }
    for (auto& [kind, agg] : mc.filters) {
        if (agg.completed == 0) {
            agg.mean_mse = std::numeric_limits<double>::quiet_NaN();
            agg.stderr_mse = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        double sum = 0.0;
        for (double v : agg.per_run_mse) {
            if (std::isfinite(v)) {
                sum += v;
            }
        }
        agg.mean_mse = sum / agg.completed;
        if (agg.completed > 1) {
            double ss = 0.0;
            for (double v : agg.per_run_mse) {
                if (std::isfinite(v)) {
                    ss += (v - agg.mean_mse) * (v - agg.mean_mse);
                }
            }
            agg.stderr_mse = std::sqrt(ss / (agg.completed - 1)) /
                             std::sqrt(static_cast<double>(agg.completed));
        }
    }
    return mc;
}

}  // namespace estkit

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "estkit/ekf.hpp"
#include "estkit/models.hpp"
#include "estkit/rng.hpp"
#include "estkit/ukf.hpp"

namespace estkit {

enum class FilterKind { Lkf, Ekf, Ukf };

std::string filter_name(FilterKind kind);
std::optional<FilterKind> parse_filter_name(const std::string& name);

enum class ProcessNoiseForm {
    Rank1,     // outer product s s^T of the stdev vector
    Diagonal,  // diag(s^2)
};

/// Falling-body tracking experiment configuration. Defaults reproduce the
/// benchmark setup: 18 one-second steps from [1e5 ft, -6000 ft/s, 2000], prior
/// variances [500, 2e4, 2.5e5], process stdev [2, 5, 8], radar variance 100.
struct ExperimentConfig {
    int steps = 18;
    double dt = 1.0;
    std::uint64_t seed = 1;
    Vector x0_truth;
    GaussianBelief belief0;
    Vector process_noise_stdev;
    double measurement_variance = 100.0;
    UkfParams ukf_params;
    std::vector<FilterKind> filters = {FilterKind::Lkf, FilterKind::Ekf, FilterKind::Ukf};
    ProcessNoiseForm q_form = ProcessNoiseForm::Rank1;
    FallingBodyParams body;
};

ExperimentConfig make_default_config();

/// Filter process-noise covariance for the configured form, scaled by dt.
Matrix process_noise_cov(ProcessNoiseForm form, const Vector& stdev, double dt);

void validate_config(const ExperimentConfig& cfg);

struct TruthData {
    std::vector<Vector> states;        // length steps, states[0] = x0_truth
    std::vector<double> measurements;  // length steps, z[k] observes states[k]
};

/// Seeded truth trajectory and radar measurements. Process and measurement
/// noise come from disjoint sub-streams of the seed, so changing the
/// measurement variance never alters the truth path.
TruthData simulate_truth(const ExperimentConfig& cfg);

struct SampleMoments {
    Vector mean;             // divisor N
    Matrix covariance;       // unbiased, divisor N-1
    Matrix autocorrelation;  // raw second moment, divisor N
};

SampleMoments sample_moments(const std::vector<Vector>& samples);

/// Post-update series of one filter over a run. All series have length
/// steps-1: filtering starts at the second measurement, the first being the
/// initial position.
struct FilterSeries {
    std::vector<Vector> estimates;
    std::vector<Matrix> covariances;
    std::vector<double> err_truth;  // estimated x1 minus true x1, ft
    std::vector<double> err_meas;   // estimated x1 minus measured x1, ft
    std::vector<double> sq_err;     // err_truth squared, ft^2
    int jitter_count = 0;
    std::optional<int> diverged_at;

    bool diverged() const { return diverged_at.has_value(); }
    double time_avg_mse() const;
};

struct ExperimentResult {
    std::vector<int> step;             // 1 .. steps-1
    std::vector<Vector> truth;         // truth aligned with the estimates
    std::vector<double> measurements;  // processed measurements z[1..]
    std::vector<std::pair<FilterKind, FilterSeries>> filters;

    const FilterSeries* series(FilterKind kind) const;
    bool any_diverged() const;
};

/// One seeded run: truth, measurements, and every enabled filter. A filter
/// that diverges is recorded with its stopping step; the others still run.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct FilterAggregate {
    int completed = 0;
    int diverged = 0;
    int jitter_total = 0;
    double mean_mse = 0.0;
    double stderr_mse = 0.0;
    std::vector<double> per_run_mse;  // NaN where the run diverged
};

struct MonteCarloResult {
    int runs = 0;
    std::vector<std::pair<FilterKind, FilterAggregate>> filters;

    const FilterAggregate* aggregate(FilterKind kind) const;
};

/// Repeats the experiment with seeds seed, seed+1, ... and aggregates the
/// per-run time-averaged position MSE. Diverged runs are tallied and left out
/// of the aggregate.
MonteCarloResult monte_carlo(const ExperimentConfig& cfg, int runs);

}  // namespace estkit

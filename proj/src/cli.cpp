#include "estkit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "estkit/kalman.hpp"
#include "estkit/report.hpp"
#include "estkit/sim.hpp"

namespace estkit {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitBadArgs = 2;
constexpr int kExitDiverged = 3;

struct CliSettings {
    ExperimentConfig cfg = make_default_config();
    int runs = 100;
    std::filesystem::path out = ".";
};

std::vector<FilterKind> parse_filter_list(const std::string& text) {
    std::vector<FilterKind> kinds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        const auto kind = parse_filter_name(item);
        if (!kind) {
            throw std::invalid_argument("unknown filter '" + item + "' (use lkf,ekf,ukf)");
        }
        if (std::find(kinds.begin(), kinds.end(), *kind) == kinds.end()) {
            kinds.push_back(*kind);
        }
    }
    return kinds;
}

ProcessNoiseForm parse_q_form(const std::string& text) {
    if (text == "rank1") {
        return ProcessNoiseForm::Rank1;
    }
    if (text == "diag") {
        return ProcessNoiseForm::Diagonal;
    }
    throw std::invalid_argument("unknown q form '" + text + "' (use rank1|diag)");
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    const auto end = s.find_last_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    std::istringstream ss(value);
    ss.imbue(std::locale::classic());
    T v{};
    ss >> v;
    if (ss.fail() || !ss.eof()) {
        throw std::invalid_argument("config key '" + key + "': bad value '" + value + "'");
    }
    return v;
}

void apply_key(CliSettings& settings, const std::string& key, const std::string& value) {
    if (key == "seed") {
        settings.cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "steps") {
        settings.cfg.steps = parse_number<int>(key, value);
    } else if (key == "dt") {
        settings.cfg.dt = parse_number<double>(key, value);
    } else if (key == "runs") {
        settings.runs = parse_number<int>(key, value);
    } else if (key == "filters") {
        settings.cfg.filters = parse_filter_list(value);
    } else if (key == "alpha") {
        settings.cfg.ukf_params.alpha = parse_number<double>(key, value);
    } else if (key == "beta") {
        settings.cfg.ukf_params.beta = parse_number<double>(key, value);
    } else if (key == "kappa") {
        settings.cfg.ukf_params.kappa = parse_number<double>(key, value);
    } else if (key == "q_form") {
        settings.cfg.q_form = parse_q_form(value);
    } else if (key == "out") {
        settings.out = value;
    } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

// Flat key=value file, '#' starts a comment.
void apply_config_file(CliSettings& settings, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot read config file " + path.string());
    }
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key=value");
        }
        apply_key(settings, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

struct FlagValues {
    std::uint64_t seed = 0;
    int steps = 0;
    double dt = 0.0;
    int runs = 0;
    std::string filters;
    double alpha = 0.0;
    double beta = 0.0;
    double kappa = 0.0;
    std::string q_form;
    std::string out;
    std::string config;
};

void add_experiment_flags(CLI::App* sub, FlagValues& v, bool with_runs) {
    sub->add_option("--seed", v.seed, "experiment seed");
    sub->add_option("--steps", v.steps, "number of time steps (>= 2)");
    sub->add_option("--dt", v.dt, "step length in seconds");
    sub->add_option("--filters", v.filters, "comma list from lkf,ekf,ukf");
    sub->add_option("--alpha", v.alpha, "sigma-point spread");
    sub->add_option("--beta", v.beta, "prior-distribution weight");
    sub->add_option("--kappa", v.kappa, "secondary scaling");
    sub->add_option("--q-form", v.q_form, "process-noise form: rank1|diag");
    sub->add_option("--out", v.out, "output directory");
    sub->add_option("--config", v.config, "key=value config file");
    if (with_runs) {
        sub->add_option("--runs", v.runs, "number of Monte Carlo runs");
    }
}

// Config file first, then explicit flags on top.
CliSettings build_settings(const CLI::App* sub, const FlagValues& v) {
    CliSettings settings;
    if (sub->count("--config") > 0) {
        apply_config_file(settings, v.config);
    }
    if (sub->count("--seed") > 0) settings.cfg.seed = v.seed;
    if (sub->count("--steps") > 0) settings.cfg.steps = v.steps;
    if (sub->count("--dt") > 0) settings.cfg.dt = v.dt;
    if (sub->count("--filters") > 0) settings.cfg.filters = parse_filter_list(v.filters);
    if (sub->count("--alpha") > 0) settings.cfg.ukf_params.alpha = v.alpha;
    if (sub->count("--beta") > 0) settings.cfg.ukf_params.beta = v.beta;
    if (sub->count("--kappa") > 0) settings.cfg.ukf_params.kappa = v.kappa;
    if (sub->count("--q-form") > 0) settings.cfg.q_form = parse_q_form(v.q_form);
    if (sub->count("--out") > 0) settings.out = v.out;
    if (sub->get_option_no_throw("--runs") != nullptr && sub->count("--runs") > 0) {
        settings.runs = v.runs;
    }
    validate_config(settings.cfg);
    return settings;
}

const char* filter_color(FilterKind kind) {
    switch (kind) {
        case FilterKind::Lkf: return "red";
        case FilterKind::Ekf: return "blue";
        case FilterKind::Ukf: return "green";
    }
    return "black";
}

int do_run(const CliSettings& settings) {
    const ExperimentResult result = run_experiment(settings.cfg);
    for (const auto& [kind, series] : result.filters) {
        if (series.diverged()) {
            std::cerr << "filter " << filter_name(kind) << " diverged at step "
                      << *series.diverged_at << "\n";
            return kExitDiverged;
        }
    }
    std::error_code ec;
    std::filesystem::create_directories(settings.out, ec);
    write_result_csv(settings.out / "result.csv", result);

    std::vector<double> steps(result.step.begin(), result.step.end());
    std::vector<SvgSeries> err_series;
    std::vector<SvgSeries> mse_series;
    for (const auto& [kind, series] : result.filters) {
        err_series.push_back(
            {filter_name(kind) + " estimate error", filter_color(kind), steps, series.err_truth});
        mse_series.push_back(
            {filter_name(kind) + " squared error", filter_color(kind), steps, series.sq_err});
    }
    write_svg_chart(settings.out / "errors.svg", "Position estimate error", "time (s)",
                    "error (ft)", err_series);
    write_svg_chart(settings.out / "mse.svg", "Position squared error", "time (s)",
                    "squared error (ft^2)", mse_series);

    std::printf("%-8s %18s %8s\n", "filter", "time_avg_mse_ft2", "jitters");
    for (const auto& [kind, series] : result.filters) {
        std::printf("%-8s %18.6f %8d\n", filter_name(kind).c_str(), series.time_avg_mse(),
                    series.jitter_count);
    }
    return kExitOk;
}

int do_montecarlo(const CliSettings& settings) {
    if (settings.runs < 1) {
        throw std::invalid_argument("montecarlo: runs must be at least 1");
    }
    const MonteCarloResult mc = monte_carlo(settings.cfg, settings.runs);
    std::error_code ec;
    std::filesystem::create_directories(settings.out, ec);
    write_mc_summary_csv(settings.out / "mc_summary.csv", mc);
    std::printf("%d runs, seeds %llu..%llu\n", mc.runs,
                static_cast<unsigned long long>(settings.cfg.seed),
                static_cast<unsigned long long>(settings.cfg.seed + mc.runs - 1));
    std::printf("%-8s %14s %12s %9s %8s\n", "filter", "mean_mse_ft2", "stderr", "diverged",
                "jitters");
    for (const auto& [kind, agg] : mc.filters) {
        std::printf("%-8s %14.4f %12.4f %9d %8d\n", filter_name(kind).c_str(), agg.mean_mse,
                    agg.stderr_mse, agg.diverged, agg.jitter_total);
    }
    return kExitOk;
}

double rel_err(const Matrix& a, const Matrix& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-12);
}

double rel_err(const Vector& a, const Vector& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-12);
}

Matrix random_spd(NormalStream& rng, int n, double ridge) {
    Matrix a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            a(i, j) = rng.next();
        }
    }
    return Matrix(a * a.transpose() + ridge * Matrix::Identity(n, n));
}

// LKF/EKF/UKF against the linear KF on random linear systems. The filters'
// process noise is zero: the non-redrawn measurement update sees process noise
// only through the carried covariance, so exact equality holds at Q = 0.
bool selftest_linear_equivalence(std::uint64_t seed) {
    NormalStream rng(Splitmix64::substream(seed, 100));
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 1 + trial % 3;
        Matrix a(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                a(i, j) = rng.next();
            }
        }
        a *= 0.9 / std::max(a.norm(), 1e-12);
        const Matrix h = Matrix::Identity(1, n);
        const Matrix q = Matrix::Zero(n, n);
        const Matrix r = Matrix::Identity(1, 1);
        const LinearSystem sys{a, Matrix::Zero(n, 1), h, q, r};
        const NonlinearModel model = make_linear_model(a, h, q, r);

        GaussianBelief b0;
        b0.mean = Vector::Zero(n);
        for (int i = 0; i < n; ++i) {
            b0.mean(i) = rng.next();
        }
        b0.cov = random_spd(rng, n, 0.5);

        GaussianBelief kf = b0;
        LkfFilter lkf = make_lkf(model, b0);
        EkfFilter ekf = make_ekf(model, b0);
        UkfFilter ukf = make_ukf(model, UkfParams{}, b0);
        Vector x_true = b0.mean;
        for (int k = 0; k < 50; ++k) {
            x_true = a * x_true;
            const Vector z = h * x_true + Vector::Constant(1, rng.next());
            kf = kf_update(kf_predict(kf, sys, Vector::Zero(1)), sys, z).posterior;
            lkf = lkf_step(lkf, z);
            ekf = ekf_step(ekf, z);
            ukf = ukf_step(ukf, z);
            worst = std::max({worst, rel_err(lkf.belief.mean, kf.mean),
                              rel_err(ekf.belief.mean, kf.mean),
                              rel_err(ukf.belief.mean, kf.mean),
                              rel_err(lkf.belief.cov, kf.cov), rel_err(ekf.belief.cov, kf.cov),
                              rel_err(ukf.belief.cov, kf.cov)});
        }
    }
    std::printf("%s linear-equivalence (worst relative deviation %.3g)\n",
                worst <= 1e-6 ? "PASS" : "FAIL", worst);
    return worst <= 1e-6;
}

bool selftest_sigma_reconstruction(std::uint64_t seed) {
    NormalStream rng(Splitmix64::substream(seed, 101));
    double worst_mean = 0.0;
    double worst_cov = 0.0;
    double worst_wsum = 0.0;
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 1 + trial % 5;
        const Matrix p = random_spd(rng, n, static_cast<double>(n));
        GaussianBelief b;
        b.mean = Vector::Zero(n);
        for (int i = 0; i < n; ++i) {
            b.mean(i) = 2.0 * rng.next();
        }
        b.cov = p;
        const UkfWeights w = ukf_weights(n, UkfParams{});
        const SigmaSet s = sigma_points(b, w);
        const UtResult identity =
            unscented_transform(s, [](const Vector& x) { return x; }, Matrix::Zero(n, n));
        worst_mean = std::max(worst_mean, rel_err(identity.mean, b.mean));
        Matrix recon = Matrix::Zero(n, n);
        for (Eigen::Index j = 0; j < s.count(); ++j) {
            const Vector d = s.points.col(j) - b.mean;
            recon += s.wc(j) * (d * d.transpose());
        }
        worst_cov = std::max(worst_cov, rel_err(recon, p));
        double wsum = 0.0;
        double comp = 0.0;
        for (Eigen::Index j = 0; j < s.wm.size(); ++j) {
            const double t = wsum + s.wm(j);
            comp += std::abs(wsum) >= std::abs(s.wm(j)) ? (wsum - t) + s.wm(j)
                                                        : (s.wm(j) - t) + wsum;
            wsum = t;
        }
        worst_wsum = std::max(worst_wsum, std::abs(wsum + comp - 1.0));
    }
    const bool ok = worst_mean <= 1e-12 && worst_cov <= 1e-9 && worst_wsum <= 1e-12;
    std::printf("%s sigma-reconstruction (mean %.3g, cov %.3g, weight sum %.3g)\n",
                ok ? "PASS" : "FAIL", worst_mean, worst_cov, worst_wsum);
    return ok;
}

int do_selftest(std::uint64_t seed) {
    const bool linear_ok = selftest_linear_equivalence(seed);
    const bool sigma_ok = selftest_sigma_reconstruction(seed);
    return (linear_ok && sigma_ok) ? kExitOk : kExitDiverged;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"estkit: Kalman/EKF/UKF estimation with a falling-body tracking benchmark"};
    app.require_subcommand(1);

    FlagValues run_flags;
    FlagValues mc_flags;
    std::uint64_t selftest_seed = 1;
    CLI::App* run = app.add_subcommand("run", "one seeded tracking run, CSV + SVG output");
    add_experiment_flags(run, run_flags, false);
    CLI::App* mc = app.add_subcommand("montecarlo", "repeated runs, MSE summary");
    add_experiment_flags(mc, mc_flags, true);
    CLI::App* st = app.add_subcommand("selftest", "quick property checks");
    st->add_option("--seed", selftest_seed, "selftest seed");

    // CLI11's vector overload consumes arguments in reverse, program name excluded.
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitBadArgs;
    }

    try {
        if (run->parsed()) {
            return do_run(build_settings(run, run_flags));
        }
        if (mc->parsed()) {
            return do_montecarlo(build_settings(mc, mc_flags));
        }
        return do_selftest(selftest_seed);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadArgs;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}

}  // namespace estkit

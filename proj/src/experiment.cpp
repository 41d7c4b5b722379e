#include "widthlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "widthlab/dataset.hpp"
#include "widthlab/network.hpp"
#include "widthlab/spectrum.hpp"

namespace widthlab {

namespace {

using nlohmann::json;

std::string fmt(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

template <typename T>
std::string join(const std::vector<T>& xs)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i > 0)
            out += ';';
        if constexpr (std::is_same_v<T, double>)
            out += fmt(xs[i]);
        else
            out += std::to_string(xs[i]);
    }
    return out;
}

double median_of(std::vector<double> xs)
{
    std::sort(xs.begin(), xs.end());
    const std::size_t k = xs.size();
    if (k == 0)
        return std::numeric_limits<double>::quiet_NaN();
    return k % 2 == 1 ? xs[k / 2] : 0.5 * (xs[k / 2 - 1] + xs[k / 2]);
}

// least squares y = b0 + b1 x; returns (slope, slope standard error)
std::pair<double, double> ls_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const auto k = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - intercept - slope * x[i];
        ssr += r * r;
    }
    const double df = k - 2.0;
    const double se = df > 0.0 ? std::sqrt(ssr / df / sxx) : 0.0;
    return {slope, se};
}

json budget_json(const NormBudget& b)
{
    return json{{"R", b.R}, {"R_b", b.R_b}, {"D_x", b.D_x}, {"delta", b.delta}};
}

NormBudget budget_from(const json& j)
{
    NormBudget b;
    b.R = j.value("R", b.R);
    b.R_b = j.value("R_b", b.R_b);
    b.D_x = j.value("D_x", b.D_x);
    b.delta = j.value("delta", b.delta);
    return b;
}

// runs every cell index through fn on `threads` workers; fn must only touch
// its own slot, aggregation happens afterwards on the calling thread
template <typename Fn>
void for_each_cell(std::size_t count, int threads, Fn fn)
{
    const int workers = std::max(1, threads);
    if (workers == 1 || count <= 1) {
        for (std::size_t k = 0; k < count; ++k)
            fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto loop = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= count)
                return;
            fn(k);
        }
    };
    std::vector<std::thread> pool;
    const auto n_threads = static_cast<std::size_t>(workers);
    pool.reserve(n_threads);
    for (std::size_t i = 0; i + 1 < n_threads; ++i)
        pool.emplace_back(loop);
    loop();
    for (auto& th : pool)
        th.join();
}

// one (n, seed) cell: data, construction, ERM, Monte-Carlo error
void run_cell(const TeacherNetwork& t, const ExperimentConfig& cfg, const WidthPlan& plan,
              std::uint64_t cell_seed, int n, double& err2, double& err2_se, double* bias2)
{
    const Dataset ds = generate_dataset(t, n, cfg.sigma, cell_seed, cfg.input_law);
    const Mat Xc = ds.X.topRows(std::min(n, cfg.n_x));
    auto built = construct_fstar(t, plan.lambda, plan.m, cfg.delta, Xc, cell_seed,
                                 cfg.sample_mode);

    Rng trng(derive_seed(cell_seed, "l2_test"));
    const Mat Xt = sample_inputs(trng, cfg.n_test, t.d_x, t.budget.D_x, cfg.input_law);
    if (bias2 != nullptr) {
        const auto b = l2_px_error(built.net, t, Xt);
        *bias2 = b.value * b.value;
    }

    NormBudget budget = t.budget;
    budget.delta = cfg.delta;
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cell_seed, "train");
    tc.init = TrainConfig::Init::fstar_warmstart;
    const auto trained = train(ds, built.net.widths, t.act, budget, tc, &built.net);

    const auto err = l2_px_error(trained.net, t, Xt);
    err2 = err.value * err.value;
    err2_se = 2.0 * err.value * err.se;
}

} // namespace

void ExperimentConfig::validate() const
{
    teacher.budget.validate();
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 2)
            throw std::invalid_argument("ExperimentConfig: every n must be >= 2");
        if (i > 0 && n_grid[i] <= n_grid[i - 1])
            throw std::invalid_argument("ExperimentConfig: n grid must be strictly increasing");
    }
    if (seeds_per_cell < 1 || bv_seeds < 1)
        throw std::invalid_argument("ExperimentConfig: seed counts must be >= 1");
    if (sigma < 0.0)
        throw std::invalid_argument("ExperimentConfig: sigma must be >= 0");
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("ExperimentConfig: delta must lie in (0, 1/2)");
    if (n_x < 2 || n_test < 2 || bv_n < 2)
        throw std::invalid_argument("ExperimentConfig: sample sizes must be >= 2");
    if (threads < 0)
        throw std::invalid_argument("ExperimentConfig: threads must be >= 0");
    if (!(fixed_lambda > 0.0))
        throw std::invalid_argument("ExperimentConfig: fixed_lambda must be positive");
    for (int m : fixed_widths)
        if (m < 1)
            throw std::invalid_argument("ExperimentConfig: fixed widths must be >= 1");
    for (int m : bv_m_grid)
        if (m < 1)
            throw std::invalid_argument("ExperimentConfig: bv widths must be >= 1");
    train.validate();
}

ExperimentConfig experiment_config_from_json(const std::string& text)
{
    const json j = json::parse(text);
    ExperimentConfig cfg;

    if (j.contains("teacher")) {
        const json& tj = j.at("teacher");
        cfg.teacher.L = tj.value("L", cfg.teacher.L);
        cfg.teacher.d_x = tj.value("d_x", cfg.teacher.d_x);
        cfg.teacher.resolutions = tj.value("resolutions", cfg.teacher.resolutions);
        if (tj.contains("budget"))
            cfg.teacher.budget = budget_from(tj.at("budget"));
        if (tj.contains("activation")) {
            const json& aj = tj.at("activation");
            cfg.teacher.act =
                Activation::parse(aj.value("kind", std::string("relu")), aj.value("param", 0.0));
        }
        cfg.teacher.decay_s = tj.value("decay_s", cfg.teacher.decay_s);
        cfg.teacher.fill = tj.value("fill", cfg.teacher.fill);
    }

    cfg.n_grid = j.value("n_grid", cfg.n_grid);
    cfg.seeds_per_cell = j.value("seeds_per_cell", cfg.seeds_per_cell);
    cfg.sigma = j.value("sigma", cfg.sigma);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.input_law = j.value("input_law", cfg.input_law);
    cfg.n_x = j.value("n_x", cfg.n_x);
    cfg.n_test = j.value("n_test", cfg.n_test);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);

    if (j.contains("train")) {
        const json& tj = j.at("train");
        cfg.train.max_epochs = tj.value("max_epochs", cfg.train.max_epochs);
        cfg.train.step_size = tj.value("step_size", cfg.train.step_size);
        cfg.train.step_decay = tj.value("step_decay", cfg.train.step_decay);
        cfg.train.batch = tj.value("batch", cfg.train.batch);
        cfg.train.tol = tj.value("tol", cfg.train.tol);
    }

    cfg.fixed_widths = j.value("fixed_widths", cfg.fixed_widths);
    cfg.fixed_lambda = j.value("fixed_lambda", cfg.fixed_lambda);
    const std::string mode = j.value("sample_mode", std::string("iid"));
    if (mode == "exhaustive")
        cfg.sample_mode = SampleMode::exhaustive;
    else if (mode == "iid")
        cfg.sample_mode = SampleMode::iid;
    else
        throw std::invalid_argument("ExperimentConfig: unknown sample_mode '" + mode + "'");

    cfg.bv_n = j.value("bv_n", cfg.bv_n);
    cfg.bv_m_grid = j.value("bv_m_grid", cfg.bv_m_grid);
    cfg.bv_seeds = j.value("bv_seeds", cfg.bv_seeds);

    cfg.validate();
    return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg)
{
    json j;
    j["teacher"] = {{"L", cfg.teacher.L},
                    {"d_x", cfg.teacher.d_x},
                    {"resolutions", cfg.teacher.resolutions},
                    {"budget", budget_json(cfg.teacher.budget)},
                    {"activation",
                     {{"kind", cfg.teacher.act.name()}, {"param", cfg.teacher.act.param}}},
                    {"decay_s", cfg.teacher.decay_s},
                    {"fill", cfg.teacher.fill}};
    j["n_grid"] = cfg.n_grid;
    j["seeds_per_cell"] = cfg.seeds_per_cell;
    j["sigma"] = cfg.sigma;
    j["delta"] = cfg.delta;
    j["input_law"] = cfg.input_law;
    j["n_x"] = cfg.n_x;
    j["n_test"] = cfg.n_test;
    j["master_seed"] = cfg.master_seed;
    j["threads"] = cfg.threads;
    j["out_dir"] = cfg.out_dir;
    j["train"] = {{"max_epochs", cfg.train.max_epochs},
                  {"step_size", cfg.train.step_size},
                  {"step_decay", cfg.train.step_decay},
                  {"batch", cfg.train.batch},
                  {"tol", cfg.train.tol}};
    j["fixed_widths"] = cfg.fixed_widths;
    j["fixed_lambda"] = cfg.fixed_lambda;
    j["sample_mode"] = cfg.sample_mode == SampleMode::exhaustive ? "exhaustive" : "iid";
    j["bv_n"] = cfg.bv_n;
    j["bv_m_grid"] = cfg.bv_m_grid;
    j["bv_seeds"] = cfg.bv_seeds;
    return j.dump();
}

Provenance make_provenance(const ExperimentConfig& cfg)
{
    Provenance p;
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(experiment_config_to_json(cfg))));
    p.config_hash = buf;
    p.seed = cfg.master_seed;
    p.version = kVersion;
    return p;
}

std::string provenance_comment(const Provenance& p)
{
    return "# config_hash=" + p.config_hash + " seed=" + std::to_string(p.seed) +
           " version=" + p.version;
}

std::vector<std::pair<double, double>> fit_teacher_decays(const TeacherNetwork& t,
                                                          const ExperimentConfig& cfg)
{
    Rng rng(derive_seed(cfg.master_seed, "spectra"));
    const Mat X = sample_inputs(rng, cfg.n_x, t.d_x, t.budget.D_x, cfg.input_law);
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(t.L) - 1);
    for (int ell = 2; ell <= t.L; ++ell) {
        const auto fit = fit_decay(layer_spectrum(t, ell, X));
        out.emplace_back(fit.a, fit.s);
    }
    return out;
}

double lambda_for_width(double a, double s, int m, double delta)
{
    if (!(a > 0.0) || !(s > 0.0 && s < 1.0))
        throw std::invalid_argument("lambda_for_width: need a > 0 and s in (0, 1)");
    if (m < 1)
        throw std::invalid_argument("lambda_for_width: m must be >= 1");
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("lambda_for_width: delta must lie in (0, 1/2)");

    // the width rule is increasing in the degree of freedom wherever it is
    // positive, so bisection on N is safe; lambda follows from the decay form
    const auto rule = [&](double N) { return 5.0 * N * std::log(32.0 * N / delta); };
    const double target = static_cast<double>(m);
    double lo = delta / 32.0;  // rule(lo) = 0 < target
    double hi = std::max(1.0, 2.0 * lo);
    for (int i = 0; i < 200 && rule(hi) < target; ++i)
        hi *= 2.0;
    if (rule(hi) < target)
        throw std::runtime_error("lambda_for_width: failed to bracket the width rule");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (rule(mid) < target ? lo : hi) = mid;
    }
    // the pow round trip from N back to lambda can land a hair on the wrong
    // side of the ceil boundary in the width rule; nudge until the planned
    // width is exactly m
    double lam = a * std::pow(lo, -1.0 / s);
    for (int i = 0; i < 64; ++i) {
        const int got = min_width(dof_from_decay(a, s, lam), delta);
        if (got == m)
            break;
        lam *= got > m ? 1.0 + 1e-12 : 1.0 - 1e-12;
    }
    return lam;
}

RateResult run_rate_sweep(const ExperimentConfig& cfg, Regime regime)
{
    cfg.validate();
    if (cfg.n_grid.size() < 4)
        throw std::invalid_argument("run_rate_sweep: need at least 4 sample sizes");
    if (cfg.seeds_per_cell < 5)
        throw std::invalid_argument("run_rate_sweep: need at least 5 seeds per cell");

    const TeacherNetwork t = sample_teacher(cfg.teacher, cfg.master_seed);
    if (t.L < 2)
        throw std::invalid_argument("run_rate_sweep: teacher needs an internal layer");
    const auto internal = static_cast<std::size_t>(t.L) - 1;

    const bool fixed = !cfg.fixed_widths.empty();
    if (fixed && cfg.fixed_widths.size() != internal)
        throw std::invalid_argument("run_rate_sweep: fixed_widths needs one entry per layer 2..L");

    RateResult res;
    res.regime = regime;
    res.decays = fit_teacher_decays(t, cfg);
    res.predicted_exponent = -std::numeric_limits<double>::infinity();
    for (const auto& [a, s] : res.decays)
        res.predicted_exponent = std::max(res.predicted_exponent, rate_exponent(regime, s));

    for (int n : cfg.n_grid) {
        if (fixed) {
            WidthPlan p;
            p.regime = regime;
            p.lambda.assign(internal, cfg.fixed_lambda);
            p.m = cfg.fixed_widths;
            p.predicted_rate_exponent = res.predicted_exponent;
            p.decays = res.decays;
            res.plans.push_back(std::move(p));
        } else {
            res.plans.push_back(plan_widths(res.decays, n, cfg.delta, regime));
        }
    }

    const auto seeds = static_cast<std::size_t>(cfg.seeds_per_cell);
    res.cells.resize(cfg.n_grid.size() * seeds);
    for_each_cell(res.cells.size(), cfg.threads, [&](std::size_t k) {
        const std::size_t i_n = k / seeds;
        RateCell cell;
        cell.regime = regime;
        cell.n = cfg.n_grid[i_n];
        cell.seed_index = static_cast<int>(k % seeds);
        try {
            // the seed ignores the regime on purpose: tight and loose runs see
            // identical datasets, so the regime comparison is paired
            const std::uint64_t cell_seed = derive_seed(cfg.master_seed, "rate_cell", k);
            run_cell(t, cfg, res.plans[i_n], cell_seed, cell.n, cell.err2, cell.err2_se, nullptr);
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.message = e.what();
        }
        res.cells[k] = std::move(cell);
    });

    for (std::size_t i_n = 0; i_n < cfg.n_grid.size(); ++i_n) {
        std::vector<double> errs;
        for (std::size_t j = 0; j < seeds; ++j) {
            const auto& cell = res.cells[i_n * seeds + j];
            if (cell.ok)
                errs.push_back(cell.err2);
        }
        if (errs.empty())
            continue;
        RatePoint p;
        p.n = cfg.n_grid[i_n];
        p.n_ok = static_cast<int>(errs.size());
        p.median_err2 = median_of(std::move(errs));
        res.points.push_back(p);
    }

    std::vector<double> xs, ys;
    for (const auto& p : res.points) {
        if (p.median_err2 > 0.0) {
            xs.push_back(std::log(static_cast<double>(p.n)));
            ys.push_back(std::log(p.median_err2));
        }
    }
    if (xs.size() >= 3) {
        const auto [slope, se] = ls_slope(xs, ys);
        res.slope = slope;
        res.slope_se = se;
        res.slope_valid = true;
    }
    return res;
}

BvResult run_bias_variance_sweep(const ExperimentConfig& cfg)
{
    cfg.validate();
    if (cfg.bv_m_grid.empty())
        throw std::invalid_argument("run_bias_variance_sweep: empty m grid");
    if (!(cfg.sigma > 0.0))
        throw std::invalid_argument("run_bias_variance_sweep: needs positive noise");

    const TeacherNetwork t = sample_teacher(cfg.teacher, cfg.master_seed);
    if (t.L < 2)
        throw std::invalid_argument("run_bias_variance_sweep: teacher needs an internal layer");
    const auto internal = static_cast<std::size_t>(t.L) - 1;

    BvResult res;
    res.n = cfg.bv_n;
    res.decays = fit_teacher_decays(t, cfg);

    NormBudget budget = t.budget;
    budget.delta = cfg.delta;
    const double g_hat = lip_diff_constant(budget, t.L, t.act);
    const double r_hat_inf = sup_norm_bound(budget, t.L, t.act).r_hat_inf;

    res.rows.resize(cfg.bv_m_grid.size());
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        BvRow& row = res.rows[i];
        row.m = cfg.bv_m_grid[i];
        for (const auto& [a, s] : res.decays)
            row.lambda.push_back(lambda_for_width(a, s, row.m, cfg.delta));
        const double d1 = delta1(budget, t.L, row.lambda);
        row.delta1_sq = d1 * d1;
        std::vector<int> widths_full;
        widths_full.push_back(t.d_x);
        widths_full.insert(widths_full.end(), internal, row.m);
        widths_full.push_back(1);
        const double d2 =
            delta2(budget, t.L, widths_full, cfg.bv_n, cfg.sigma, g_hat, r_hat_inf);
        row.delta2_sq = d2 * d2;
    }

    const auto seeds = static_cast<std::size_t>(cfg.bv_seeds);
    struct Cell {
        double bias2 = 0.0;
        double excess2 = 0.0;
        bool ok = false;
        std::string message;
    };
    std::vector<Cell> cells(cfg.bv_m_grid.size() * seeds);
    for_each_cell(cells.size(), cfg.threads, [&](std::size_t k) {
        const std::size_t i_m = k / seeds;
        Cell cell;
        try {
            const std::uint64_t cell_seed = derive_seed(cfg.master_seed, "bv_cell", k);
            WidthPlan plan;
            plan.lambda = res.rows[i_m].lambda;
            plan.m.assign(internal, res.rows[i_m].m);
            double err2_se = 0.0;
            run_cell(t, cfg, plan, cell_seed, cfg.bv_n, cell.excess2, err2_se, &cell.bias2);
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.message = e.what();
        }
        cells[k] = std::move(cell);
    });

    for (std::size_t i_m = 0; i_m < res.rows.size(); ++i_m) {
        std::vector<double> bias, excess;
        for (std::size_t j = 0; j < seeds; ++j) {
            const auto& cell = cells[i_m * seeds + j];
            if (cell.ok) {
                bias.push_back(cell.bias2);
                excess.push_back(cell.excess2);
            } else if (res.rows[i_m].message.empty()) {
                res.rows[i_m].message = cell.message;
            }
        }
        res.rows[i_m].n_ok = static_cast<int>(bias.size());
        if (!bias.empty()) {
            res.rows[i_m].bias2 = median_of(std::move(bias));
            res.rows[i_m].excess2 = median_of(std::move(excess));
        }
    }
    return res;
}

void write_rate_result(const RateResult& res, const ExperimentConfig& cfg,
                       const std::string& out_dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto prov = make_provenance(cfg);
    const std::string tag = regime_name(res.regime);

    {
        std::ofstream out(fs::path(out_dir) / ("rate_cells_" + tag + ".csv"));
        out << provenance_comment(prov) << "\n";
        out << "regime,n,seed_index,err2,err2_se,ok,message\n";
        for (const auto& c : res.cells)
            out << tag << ',' << c.n << ',' << c.seed_index << ',' << fmt(c.err2) << ','
                << fmt(c.err2_se) << ',' << (c.ok ? 1 : 0) << ',' << csv_escape(c.message)
                << "\n";
    }
    {
        std::ofstream out(fs::path(out_dir) / ("rate_summary_" + tag + ".csv"));
        out << provenance_comment(prov) << "\n";
        out << "n,n_ok,median_err2,widths,lambdas\n";
        for (const auto& p : res.points) {
            std::size_t i_n = 0;
            while (cfg.n_grid[i_n] != p.n)
                ++i_n;
            out << p.n << ',' << p.n_ok << ',' << fmt(p.median_err2) << ','
                << join(res.plans[i_n].m) << ',' << join(res.plans[i_n].lambda) << "\n";
        }
    }

    json j;
    j["provenance"] = {{"config_hash", prov.config_hash},
                       {"seed", prov.seed},
                       {"version", prov.version}};
    j["regime"] = tag;
    j["predicted_exponent"] = res.predicted_exponent;
    j["slope"] = res.slope;
    j["slope_se"] = res.slope_se;
    j["slope_valid"] = res.slope_valid;
    j["decays"] = json::array();
    for (std::size_t i = 0; i < res.decays.size(); ++i)
        j["decays"].push_back(
            {{"layer", 2 + static_cast<int>(i)}, {"a", res.decays[i].first},
             {"s", res.decays[i].second}});
    j["points"] = json::array();
    for (const auto& p : res.points)
        j["points"].push_back({{"n", p.n}, {"median_err2", p.median_err2}, {"n_ok", p.n_ok}});
    j["plans"] = json::array();
    for (std::size_t i = 0; i < res.plans.size(); ++i)
        j["plans"].push_back(json::parse(width_plan_to_json(res.plans[i], cfg.n_grid[i],
                                                            cfg.delta)));
    std::ofstream out(fs::path(out_dir) / ("rate_report_" + tag + ".json"));
    out << j.dump(2) << "\n";
}

void write_bv_result(const BvResult& res, const ExperimentConfig& cfg, const std::string& out_dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto prov = make_provenance(cfg);

    {
        std::ofstream out(fs::path(out_dir) / "bv_sweep.csv");
        out << provenance_comment(prov) << "\n";
        out << "m,bias2,excess2,delta1_sq,delta2_sq,n_ok,lambdas\n";
        for (const auto& r : res.rows)
            out << r.m << ',' << fmt(r.bias2) << ',' << fmt(r.excess2) << ','
                << fmt(r.delta1_sq) << ',' << fmt(r.delta2_sq) << ',' << r.n_ok << ','
                << join(r.lambda) << "\n";
    }

    json j;
    j["provenance"] = {{"config_hash", prov.config_hash},
                       {"seed", prov.seed},
                       {"version", prov.version}};
    j["n"] = res.n;
    j["decays"] = json::array();
    for (std::size_t i = 0; i < res.decays.size(); ++i)
        j["decays"].push_back(
            {{"layer", 2 + static_cast<int>(i)}, {"a", res.decays[i].first},
             {"s", res.decays[i].second}});
    j["rows"] = json::array();
    for (const auto& r : res.rows)
        j["rows"].push_back({{"m", r.m},
                             {"lambda", r.lambda},
                             {"bias2", r.bias2},
                             {"excess2", r.excess2},
                             {"delta1_sq", r.delta1_sq},
                             {"delta2_sq", r.delta2_sq},
                             {"n_ok", r.n_ok},
                             {"message", r.message}});
    std::ofstream out(fs::path(out_dir) / "bv_report.json");
    out << j.dump(2) << "\n";
}

} // namespace widthlab

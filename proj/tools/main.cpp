#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "widthlab/bounds.hpp"
#include "widthlab/dataset.hpp"
#include "widthlab/discretize.hpp"
#include "widthlab/erm.hpp"
#include "widthlab/experiment.hpp"
#include "widthlab/network.hpp"
#include "widthlab/spectrum.hpp"
#include "widthlab/teacher.hpp"

namespace {

using nlohmann::json;
using namespace widthlab;

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    if (!path.parent_path().empty())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
}

struct GlobalArgs {
    std::string config;
    std::uint64_t seed = 1;
    bool seed_set = false;
    std::string out = "out";
    int threads = 1;
    bool threads_set = false;
};

// one config object drives every subcommand; CLI flags override its fields
ExperimentConfig load_config(const GlobalArgs& g)
{
    ExperimentConfig cfg;
    if (!g.config.empty())
        cfg = experiment_config_from_json(read_file(g.config));
    if (g.seed_set)
        cfg.master_seed = g.seed;
    if (g.threads_set)
        cfg.threads = g.threads;
    cfg.out_dir = g.out;
    return cfg;
}

json provenance_json(const ExperimentConfig& cfg)
{
    const auto p = make_provenance(cfg);
    return json{{"config_hash", p.config_hash}, {"seed", p.seed}, {"version", p.version}};
}

std::vector<double> parse_doubles(const std::string& s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(std::stod(item));
    return out;
}

std::vector<int> parse_ints(const std::string& s)
{
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(std::stoi(item));
    return out;
}

void cmd_gen_teacher(const GlobalArgs& g)
{
    const auto cfg = load_config(g);
    const auto t = sample_teacher(cfg.teacher, cfg.master_seed);
    json j;
    j["provenance"] = provenance_json(cfg);
    j["teacher"] = json::parse(teacher_to_json(t));
    const auto path = std::filesystem::path(cfg.out_dir) / "teacher.json";
    write_file(path, j.dump(2) + "\n");
    std::cout << "teacher: L=" << t.L << " d_x=" << t.d_x << " -> " << path.string() << "\n";
}

void cmd_dof_curve(const GlobalArgs& g, const std::string& teacher_path, double lambda_min,
                   double lambda_max, int lambda_count)
{
    const auto cfg = load_config(g);
    const auto t = load_teacher(teacher_path);
    if (!(lambda_min > 0.0) || !(lambda_max >= lambda_min) || lambda_count < 1)
        throw std::invalid_argument("dof-curve: need 0 < lambda-min <= lambda-max, count >= 1");

    Rng rng(derive_seed(cfg.master_seed, "spectra"));
    const Mat X = sample_inputs(rng, cfg.n_x, t.d_x, t.budget.D_x, cfg.input_law);

    std::vector<double> grid;
    for (int i = 0; i < lambda_count; ++i) {
        const double u = lambda_count == 1
                             ? 0.0
                             : static_cast<double>(i) / static_cast<double>(lambda_count - 1);
        grid.push_back(lambda_min * std::pow(lambda_max / lambda_min, u));
    }

    const auto prov = make_provenance(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream csv(std::filesystem::path(cfg.out_dir) / "dof_curve.csv");
    csv.precision(17);
    csv << provenance_comment(prov) << "\n";
    csv << "layer,lambda,dof,min_width\n";

    json report;
    report["provenance"] = provenance_json(cfg);
    report["layers"] = json::array();
    for (int ell = 2; ell <= t.L; ++ell) {
        const auto spec = layer_spectrum(t, ell, X);
        const auto fit = fit_decay(spec);
        report["layers"].push_back({{"layer", ell},
                                    {"a", fit.a},
                                    {"s", fit.s},
                                    {"s_raw", fit.s_raw},
                                    {"clamped", fit.clamped},
                                    {"eigenvalues_used", fit.n_used}});
        for (double lambda : grid) {
            const double N = dof(spec, lambda);
            csv << ell << ',' << lambda << ',' << N << ',' << min_width(N, cfg.delta) << "\n";
        }
    }
    write_file(std::filesystem::path(cfg.out_dir) / "dof_report.json", report.dump(2) + "\n");
    std::cout << "dof curve over " << grid.size() << " lambdas -> " << cfg.out_dir << "\n";
}

void cmd_discretize(const GlobalArgs& g, const std::string& teacher_path,
                    const std::string& lambda_arg, const std::string& m_arg, bool exhaustive)
{
    const auto cfg = load_config(g);
    const auto t = load_teacher(teacher_path);
    const auto internal = static_cast<std::size_t>(t.L) - 1;

    auto lambdas = parse_doubles(lambda_arg);
    if (lambdas.size() == 1 && internal > 1)
        lambdas.assign(internal, lambdas[0]);
    if (lambdas.size() != internal)
        throw std::invalid_argument("discretize: need one lambda per layer 2..L");

    Rng rng(derive_seed(cfg.master_seed, "spectra"));
    const Mat X = sample_inputs(rng, cfg.n_x, t.d_x, t.budget.D_x, cfg.input_law);

    std::vector<int> widths;
    if (!m_arg.empty()) {
        widths = parse_ints(m_arg);
        if (widths.size() == 1 && internal > 1)
            widths.assign(internal, widths[0]);
        if (widths.size() != internal)
            throw std::invalid_argument("discretize: need one width per layer 2..L");
    } else {
        for (std::size_t k = 0; k < internal; ++k) {
            const auto spec = layer_spectrum(t, 2 + static_cast<int>(k), X);
            widths.push_back(min_width(dof(spec, lambdas[k]), cfg.delta));
        }
    }

    const auto mode = exhaustive ? SampleMode::exhaustive : SampleMode::iid;
    const auto built = construct_fstar(t, lambdas, widths, cfg.delta, X,
                                       derive_seed(cfg.master_seed, "discretize"), mode);

    Rng trng(derive_seed(cfg.master_seed, "l2_test"));
    const Mat Xt = sample_inputs(trng, cfg.n_test, t.d_x, t.budget.D_x, cfg.input_law);
    const auto err = l2_px_error(built.net, t, Xt);

    NormBudget budget = t.budget;
    budget.delta = cfg.delta;
    const double d1 = delta1(budget, t.L, lambdas);

    json j;
    j["provenance"] = provenance_json(cfg);
    j["l2_error"] = err.value;
    j["l2_error_se"] = err.se;
    j["delta1"] = d1;
    j["layers"] = json::array();
    for (const auto& li : built.layers)
        j["layers"].push_back({{"layer", li.ell},
                               {"m", li.m},
                               {"lambda", li.lambda},
                               {"dof", li.dof},
                               {"mean_w2", li.mean_w2},
                               {"uniform_fallback", li.uniform_fallback},
                               {"beta_rescales", li.beta_rescales},
                               {"row_rescales", li.row_rescales},
                               {"mean_row_err", li.mean_row_err},
                               {"max_row_err", li.max_row_err},
                               {"min_width", li.width_rule_32},
                               {"min_width_16", li.width_rule_16}});
    j["network"] = json::parse(network_to_json(built.net));
    const auto path = std::filesystem::path(cfg.out_dir) / "fstar.json";
    write_file(path, j.dump(2) + "\n");
    std::cout << "construction error " << err.value << " vs delta1 " << d1 << " -> "
              << path.string() << "\n";
}

void cmd_train(const GlobalArgs& g, const std::string& data_path, const std::string& widths_arg,
               const std::string& budget_path, const std::string& init_arg,
               const std::string& warm_path)
{
    const auto cfg = load_config(g);
    const auto ds = load_dataset(data_path);

    NormBudget budget;
    if (!budget_path.empty())
        budget = [&] {
            const json bj = json::parse(read_file(budget_path));
            NormBudget b;
            b.R = bj.value("R", b.R);
            b.R_b = bj.value("R_b", b.R_b);
            b.D_x = bj.value("D_x", b.D_x);
            b.delta = bj.value("delta", b.delta);
            return b;
        }();

    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.master_seed, "train");

    FiniteNetwork warm;
    const FiniteNetwork* warm_ptr = nullptr;
    std::vector<int> widths;
    Activation act;
    if (init_arg == "fstar") {
        if (warm_path.empty())
            throw std::invalid_argument("train: --init fstar needs --warm-start <json>");
        warm = load_network(warm_path);
        warm_ptr = &warm;
        widths = warm.widths;
        act = warm.act;
        tc.init = TrainConfig::Init::fstar_warmstart;
    } else if (init_arg == "random") {
        if (widths_arg.empty())
            throw std::invalid_argument("train: --init random needs --widths");
        widths = parse_ints(widths_arg);
        tc.init = TrainConfig::Init::random_in_F;
    } else {
        throw std::invalid_argument("train: --init must be fstar or random");
    }

    const auto res = train(ds, widths, act, budget, tc, warm_ptr);

    const auto prov = make_provenance(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream hist(std::filesystem::path(cfg.out_dir) / "train_history.csv");
    hist.precision(17);
    hist << provenance_comment(prov) << "\n";
    hist << "epoch,risk\n";
    for (std::size_t i = 0; i < res.history.size(); ++i)
        hist << i << ',' << res.history[i] << "\n";

    json j;
    j["provenance"] = provenance_json(cfg);
    j["epochs_run"] = res.epochs_run;
    j["converged"] = res.converged;
    j["final_risk"] = res.history.back();
    j["network"] = json::parse(network_to_json(res.net));
    const auto path = std::filesystem::path(cfg.out_dir) / "fhat.json";
    write_file(path, j.dump(2) + "\n");
    std::cout << "risk " << res.history.front() << " -> " << res.history.back() << " in "
              << res.epochs_run << " epochs -> " << path.string() << "\n";
}

void cmd_bounds_report(const GlobalArgs& g, const std::string& widths_arg,
                       const std::string& lambda_arg, int n, double sigma, double r,
                       double r_tilde, const std::string& eps_arg, const std::string& act_name,
                       double act_param)
{
    const auto cfg = load_config(g);
    const auto widths = parse_ints(widths_arg);
    const auto lambdas = parse_doubles(lambda_arg);
    const auto eps_grid = eps_arg.empty() ? std::vector<double>{0.5, 0.25, 0.1}
                                          : parse_doubles(eps_arg);
    NormBudget budget = cfg.teacher.budget;
    budget.delta = cfg.delta;
    const auto act = Activation::parse(act_name, act_param);
    const int L = static_cast<int>(widths.size()) - 1;
    const auto rep = make_bound_report(budget, act, widths, lambdas, n, sigma, r, r_tilde,
                                       eps_grid);
    json j;
    j["provenance"] = provenance_json(cfg);
    j["report"] = json::parse(bound_report_to_json(rep));
    const auto path = std::filesystem::path(cfg.out_dir) / "bounds_report.json";
    write_file(path, j.dump(2) + "\n");
    std::cout << "bounds for L=" << L << ": delta1=" << rep.delta1 << " delta2=" << rep.delta2
              << " thm2=" << rep.thm2 << " -> " << path.string() << "\n";
}

void cmd_plan(const GlobalArgs& g, const std::vector<double>& as, const std::vector<double>& ss,
              int n, const std::string& regime_arg)
{
    const auto cfg = load_config(g);
    if (as.empty() || as.size() != ss.size())
        throw std::invalid_argument("plan: need matching --a and --s, one pair per layer 2..L");
    std::vector<std::pair<double, double>> decays;
    for (std::size_t i = 0; i < as.size(); ++i)
        decays.emplace_back(as[i], ss[i]);
    const auto regime = parse_regime(regime_arg);
    const auto plan = plan_widths(decays, n, cfg.delta, regime);
    json j;
    j["provenance"] = provenance_json(cfg);
    j["plan"] = json::parse(width_plan_to_json(plan, n, cfg.delta));
    const auto path = std::filesystem::path(cfg.out_dir) / "plan.json";
    write_file(path, j.dump(2) + "\n");
    std::cout << "plan[" << regime_name(regime) << "] n=" << n << " widths=";
    for (std::size_t i = 0; i < plan.m.size(); ++i)
        std::cout << (i ? "," : "") << plan.m[i];
    std::cout << " predicted_exponent=" << plan.predicted_rate_exponent << " -> "
              << path.string() << "\n";
}

void cmd_rate_sweep(const GlobalArgs& g, const std::string& regime_arg)
{
    const auto cfg = load_config(g);
    std::vector<Regime> regimes;
    if (regime_arg == "both")
        regimes = {Regime::tight, Regime::loose};
    else
        regimes = {parse_regime(regime_arg)};
    for (const auto regime : regimes) {
        const auto res = run_rate_sweep(cfg, regime);
        write_rate_result(res, cfg, cfg.out_dir);
        std::cout << "rate[" << regime_name(regime) << "]: ";
        if (res.slope_valid)
            std::cout << "slope=" << res.slope << " se=" << res.slope_se;
        else
            std::cout << "slope undefined (" << res.points.size() << " usable points)";
        std::cout << " predicted=" << res.predicted_exponent << "\n";
    }
}

void cmd_bv_sweep(const GlobalArgs& g)
{
    const auto cfg = load_config(g);
    const auto res = run_bias_variance_sweep(cfg);
    write_bv_result(res, cfg, cfg.out_dir);
    std::cout << "bias-variance sweep: " << res.rows.size() << " widths at n=" << res.n
              << " -> " << cfg.out_dir << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"finite-width network laboratory"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config, "JSON experiment config")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", g.seed, "master seed");
    app.add_option("--out", g.out, "output directory");
    auto* threads_opt = app.add_option("--threads", g.threads, "worker threads");

    auto* gen = app.add_subcommand("gen-teacher", "draw a teacher network and save it");
    gen->fallthrough();

    auto* dofc = app.add_subcommand("dof-curve", "degree-of-freedom curve per layer");
    dofc->fallthrough();
    std::string teacher_path;
    double lmin = 1e-4, lmax = 1.0;
    int lcount = 25;
    dofc->add_option("--teacher", teacher_path, "teacher JSON")->required()
        ->check(CLI::ExistingFile);
    dofc->add_option("--lambda-min", lmin, "smallest lambda");
    dofc->add_option("--lambda-max", lmax, "largest lambda");
    dofc->add_option("--lambda-count", lcount, "grid size");

    auto* disc = app.add_subcommand("discretize", "sample nodes and fit the finite network");
    disc->fallthrough();
    std::string disc_teacher, disc_lambda = "0.01", disc_m;
    bool disc_exhaustive = false;
    disc->add_option("--teacher", disc_teacher, "teacher JSON")->required()
        ->check(CLI::ExistingFile);
    disc->add_option("--lambda", disc_lambda, "lambda per layer 2..L (comma list)");
    disc->add_option("--m", disc_m, "width per layer 2..L (default: width rule)");
    disc->add_flag("--exhaustive", disc_exhaustive, "keep every node instead of sampling");

    auto* tr = app.add_subcommand("train", "run the constrained ERM on a dataset");
    tr->fallthrough();
    std::string tr_data, tr_widths, tr_budget, tr_init = "random", tr_warm;
    tr->add_option("--data", tr_data, "dataset CSV")->required()->check(CLI::ExistingFile);
    tr->add_option("--widths", tr_widths, "full width list d_x,...,1 for random init");
    tr->add_option("--budget", tr_budget, "norm budget JSON")->check(CLI::ExistingFile);
    tr->add_option("--init", tr_init, "fstar or random");
    tr->add_option("--warm-start", tr_warm, "network JSON for fstar init")
        ->check(CLI::ExistingFile);

    auto* br = app.add_subcommand("bounds-report", "closed-form bound report");
    br->fallthrough();
    std::string br_widths, br_lambdas, br_eps, br_act = "relu";
    int br_n = 1024;
    double br_sigma = 0.1, br_r = 1.0, br_rt = 1.5, br_act_param = 0.0;
    br->add_option("--widths", br_widths, "full width list m_1,...,m_{L+1}")->required();
    br->add_option("--lambdas", br_lambdas, "lambda per layer 2..L")->required();
    br->add_option("--n", br_n, "sample size");
    br->add_option("--sigma", br_sigma, "noise level");
    br->add_option("--r", br_r, "tail parameter r");
    br->add_option("--r-tilde", br_rt, "bracket parameter");
    br->add_option("--eps", br_eps, "covering radii (comma list)");
    br->add_option("--activation", br_act, "activation name");
    br->add_option("--activation-param", br_act_param, "activation parameter");

    auto* pl = app.add_subcommand("plan", "width plan from fitted decays");
    pl->fallthrough();
    std::vector<double> pl_a, pl_s;
    int pl_n = 1024;
    std::string pl_regime = "tight";
    pl->add_option("--a", pl_a, "decay scale per layer 2..L");
    pl->add_option("--s", pl_s, "decay exponent per layer 2..L");
    pl->add_option("--n", pl_n, "sample size");
    pl->add_option("--regime", pl_regime, "tight or loose");

    auto* rs = app.add_subcommand("rate-sweep", "error rate over the n grid");
    rs->fallthrough();
    std::string rs_regime = "tight";
    rs->add_option("--regime", rs_regime, "tight, loose, or both");

    auto* bv = app.add_subcommand("bv-sweep", "bias-variance table over widths");
    bv->fallthrough();

    CLI11_PARSE(app, argc, argv);
    g.seed_set = seed_opt->count() > 0;
    g.threads_set = threads_opt->count() > 0;

    try {
        if (*gen)
            cmd_gen_teacher(g);
        else if (*dofc)
            cmd_dof_curve(g, teacher_path, lmin, lmax, lcount);
        else if (*disc)
            cmd_discretize(g, disc_teacher, disc_lambda, disc_m, disc_exhaustive);
        else if (*tr)
            cmd_train(g, tr_data, tr_widths, tr_budget, tr_init, tr_warm);
        else if (*br)
            cmd_bounds_report(g, br_widths, br_lambdas, br_n, br_sigma, br_r, br_rt, br_eps,
                              br_act, br_act_param);
        else if (*pl)
            cmd_plan(g, pl_a, pl_s, pl_n, pl_regime);
        else if (*rs)
            cmd_rate_sweep(g, rs_regime);
        else if (*bv)
            cmd_bv_sweep(g);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

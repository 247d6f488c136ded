#include "cli.hpp"

#include "ocsmm/data.hpp"
#include "ocsmm/density.hpp"
#include "ocsmm/eval.hpp"
#include "ocsmm/io.hpp"
#include "ocsmm/kernel.hpp"
#include "ocsmm/model.hpp"
#include "ocsmm/numeric.hpp"
#include "ocsmm/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

namespace ocsmm::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct KernelFlags {
    std::string kernel = "empirical";
    std::string level2 = "linear";
    bool normalize = false;
    std::optional<double> sigma;
    std::string gamma_rule = "median";
    std::optional<double> gamma;

    KernelConfig config() const {
        KernelConfig c;
        c.embedding = parse_mean_embedding(kernel);
        c.outer = parse_outer_kernel(level2);
        c.normalize = normalize;
        c.sigma = sigma;
        c.gamma_rule = parse_gamma_rule(gamma_rule);
        c.gamma = gamma;
        if (c.gamma_rule == GammaRule::Fixed && !c.gamma) throw std::invalid_argument("--gamma-rule fixed needs --gamma");
        if (c.gamma && c.gamma_rule != GammaRule::Fixed) c.gamma_rule = GammaRule::Fixed;
        return c;
    }
};

struct SolverFlags {
    double nu = 0.1;
    double tol = 1e-6;
    std::int64_t max_iter = 10'000'000;

    SolverConfig config() const {
        SolverConfig c;
        c.tol = tol;
        c.max_iter = max_iter;
        return c;
    }
};

void add_kernel_flags(CLI::App* sub, KernelFlags& k) {
    sub->add_option("--kernel", k.kernel, "mean embedding")->check(CLI::IsMember({"empirical", "analytic"}))->capture_default_str();
    sub->add_option("--level2", k.level2, "kernel on embeddings")->check(CLI::IsMember({"linear", "rbf"}))->capture_default_str();
    sub->add_flag("--normalize", k.normalize, "spherical normalization of the embedding Gram");
    sub->add_option("--sigma", k.sigma, "base RBF bandwidth (default: median heuristic)")->check(CLI::PositiveNumber);
    sub->add_option("--gamma-rule", k.gamma_rule, "gamma for --level2 rbf")
        ->check(CLI::IsMember({"median", "sigma", "fixed"}))
        ->capture_default_str();
    sub->add_option("--gamma", k.gamma, "fixed gamma (implies --gamma-rule fixed)")->check(CLI::PositiveNumber);
}

void add_solver_flags(CLI::App* sub, SolverFlags& s, bool with_nu) {
    if (with_nu) sub->add_option("--nu", s.nu, "outlier fraction bound, in (0, 1]")->capture_default_str();
    sub->add_option("--tol", s.tol, "KKT tolerance")->capture_default_str();
    sub->add_option("--max-iter", s.max_iter, "SMO iteration cap")->capture_default_str();
}

void check_nu(double nu) {
    if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("--nu must lie in (0, 1]");
}

json kernel_json(const KernelFlags& k) {
    json j = {{"kernel", k.kernel}, {"level2", k.level2}, {"normalize", k.normalize}, {"gamma_rule", k.gamma_rule}};
    j["sigma"] = k.sigma ? json(*k.sigma) : json(nullptr);
    j["gamma"] = k.gamma ? json(*k.gamma) : json(nullptr);
    return j;
}

json solver_json(const SolverFlags& s) { return {{"nu", s.nu}, {"tol", s.tol}, {"max_iter", s.max_iter}}; }

fs::path sidecar(const fs::path& out, const std::string& suffix) { return fs::path(out.string() + suffix); }

void echo_config(const fs::path& out, const json& config) { write_text(sidecar(out, ".config.json"), config.dump(2) + "\n"); }

GroupDataset read_dataset(const fs::path& path) {
    if (!fs::exists(path)) throw std::invalid_argument("no such file: " + path.string());
    if (path.extension() == ".csv") return load_points_csv(path);
    return load_jsonl(path);
}

// ---- synth ----

struct SynthArgs {
    std::string generator;
    std::uint64_t seed = 0;
    std::string out;
    std::size_t n = 500;
    std::size_t count = 10;
    NoiseOptions noise;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    GroupDataset ds;
    if (a.generator == "rotated") ds = synth_rotated_gaussians(a.seed);
    else if (a.generator == "mixture") ds = synth_mixture_groups(a.seed);
    else if (a.generator == "circle") ds = synth_noisy_circle(a.seed, a.n, a.noise);
    else if (a.generator == "flower") ds = synth_noisy_flower(a.seed, a.n, a.noise);
    else if (a.generator == "injected") {
        RotatedOptions opts;
        opts.rotated_groups = 0;
        opts.shift_one_group = false;
        ds = inject_aggregation_anomalies(synth_rotated_gaussians(a.seed, opts), a.count, a.seed + 1);
    } else throw std::invalid_argument("unknown generator: " + a.generator);

    save_jsonl(ds, a.out);
    json config = {{"command", "synth"},
                   {"generator", a.generator},
                   {"seed", a.seed},
                   {"out", a.out},
                   {"n", a.n},
                   {"count", a.count},
                   {"noise",
                    {{"base_noise", a.noise.base_noise},
                     {"base_noise_is_std", a.noise.base_noise_is_std},
                     {"omega_lo", a.noise.omega_lo},
                     {"omega_hi", a.noise.omega_hi},
                     {"omega_is_std", a.noise.omega_is_std}}},
                   {"provenance", ds.provenance},
                   {"threads", thread_count()}};
    echo_config(a.out, config);
    out << "wrote " << ds.size() << " groups (" << ds.anomaly_count() << " labeled anomalous) to " << a.out << "\n";
    return kOk;
}

// ---- fit ----

struct FitArgs {
    std::string data;
    std::string model_out;
    std::string scores_out;
    KernelFlags kernel;
    SolverFlags solver;
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
    check_nu(a.solver.nu);
    const GroupDataset ds = read_dataset(a.data);
    const OcsmmModel model = OcsmmModel::fit(ds.groups, a.kernel.config(), a.solver.nu, a.solver.config());
    save_model(model, a.model_out);

    const NuPropertyReport nu_check = nu_property_check(model, ds.groups, a.solver.tol);
    const FitReport& r = model.report();
    json report = {{"objective", r.objective},
                   {"iterations", r.iterations},
                   {"converged", r.converged},
                   {"rho", model.rho()},
                   {"n_train", r.n_train},
                   {"n_support", r.n_support},
                   {"n_bounded", r.n_bounded},
                   {"max_violation", r.max_violation},
                   {"jitter", r.jitter},
                   {"warnings", r.warnings},
                   {"nu_property",
                    {{"nu", r.nu},
                     {"outlier_fraction", nu_check.outlier_fraction},
                     {"sv_fraction", nu_check.sv_fraction},
                     {"holds", nu_check.holds}}},
                   {"spec", spec_to_json(model.spec())}};
    write_text(sidecar(a.model_out, ".report.json"), report.dump(2) + "\n");
    if (!a.scores_out.empty()) save_scores_csv(score_dataset(model, ds.groups), a.scores_out);

    echo_config(a.model_out, {{"command", "fit"},
                              {"data", a.data},
                              {"model_out", a.model_out},
                              {"scores_out", a.scores_out},
                              {"kernel", kernel_json(a.kernel)},
                              {"resolved_spec", spec_to_json(model.spec())},
                              {"solver", solver_json(a.solver)},
                              {"threads", thread_count()}});

    for (const auto& w : r.warnings) err << "warning: " << w << "\n";
    out << "objective " << format_double(r.objective) << ", " << r.iterations << " iterations, " << r.n_support
        << " support groups, outlier fraction " << format_double(nu_check.outlier_fraction) << "\n";
    if (!r.converged) {
        err << "solver did not converge (max violation " << format_double(r.max_violation) << ")\n";
        return kNoConvergence;
    }
    return kOk;
}

// ---- score ----

struct ScoreArgs {
    std::string model;
    std::string data;
    std::string out;
};

OcsmmModel read_model(const fs::path& path) {
    if (!fs::exists(path)) throw std::invalid_argument("no such file: " + path.string());
    return load_model(path);
}

ScoredDataset score_checked(const OcsmmModel& model, const GroupDataset& ds) {
    if (model.dim() != static_cast<Eigen::Index>(ds.dim()))
        throw std::invalid_argument("model dimension " + std::to_string(model.dim()) + " does not match dataset dimension " +
                                    std::to_string(ds.dim()));
    return score_dataset(model, ds.groups);
}

int cmd_score(const ScoreArgs& a, std::ostream& out) {
    const OcsmmModel model = read_model(a.model);
    const GroupDataset ds = read_dataset(a.data);
    const ScoredDataset scores = score_checked(model, ds);
    save_scores_csv(scores, a.out);
    echo_config(a.out, {{"command", "score"}, {"model", a.model}, {"data", a.data}, {"out", a.out}, {"threads", thread_count()}});
    const auto flagged = static_cast<std::size_t>(std::count(scores.is_anomaly.begin(), scores.is_anomaly.end(), true));
    out << "scored " << scores.group_ids.size() << " groups, " << flagged << " flagged\n";
    return kOk;
}

// ---- eval ----

struct EvalArgs {
    std::string scores;
    std::string model;
    std::string data;
    std::string out;
    std::string roc_out;
    std::string svg;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    const GroupDataset ds = read_dataset(a.data);
    ScoredDataset scored;
    if (!a.scores.empty()) {
        if (!fs::exists(a.scores)) throw std::invalid_argument("no such file: " + a.scores);
        scored = load_scores_csv(a.scores);
    } else if (!a.model.empty()) {
        scored = score_checked(read_model(a.model), ds);
    } else {
        throw std::invalid_argument("eval needs --scores or --model");
    }

    std::map<std::string, bool> label_of;
    for (const auto& g : ds.groups) {
        if (!g.label) throw std::invalid_argument("group " + g.id + " has no label");
        label_of[g.id] = *g.label;
    }
    std::vector<double> anomaly_score;
    std::vector<bool> labels;
    for (std::size_t i = 0; i < scored.group_ids.size(); ++i) {
        const auto it = label_of.find(scored.group_ids[i]);
        if (it == label_of.end()) throw std::invalid_argument("no label for scored group " + scored.group_ids[i]);
        anomaly_score.push_back(-scored.decision[i]);
        labels.push_back(it->second);
    }
    const RocResult roc = roc_auc(anomaly_score, labels);
    const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));

    std::ostringstream metrics;
    metrics << "auc,ap,n,n_anomalous\n"
            << format_double(roc.auc) << ',' << format_double(roc.ap) << ',' << labels.size() << ',' << positives << '\n';
    write_text(a.out, metrics.str());
    const std::string roc_path = a.roc_out.empty() ? sidecar(a.out, ".roc.csv").string() : a.roc_out;
    write_text(roc_path, roc_to_csv(roc));
    if (!a.svg.empty()) write_text(a.svg, svg_roc(roc, "ROC"));
    echo_config(a.out, {{"command", "eval"},
                        {"scores", a.scores},
                        {"model", a.model},
                        {"data", a.data},
                        {"out", a.out},
                        {"roc_out", roc_path},
                        {"svg", a.svg}});
    out << "auc " << format_double(roc.auc) << ", ap " << format_double(roc.ap) << "\n";
    return kOk;
}

// ---- sweep ----

struct SweepArgs {
    std::string data;
    std::string out;
    std::vector<double> nus;
    KernelFlags kernel;
    SolverFlags solver;
};

int cmd_sweep(SweepArgs a, std::ostream& out, std::ostream& err) {
    if (a.nus.empty()) a.nus = default_nu_grid();
    for (double nu : a.nus) check_nu(nu);
    const GroupDataset ds = read_dataset(a.data);
    const KernelConfig kc = a.kernel.config();
    const auto rows = nu_sweep(ds, kc, a.nus, a.solver.config());
    write_text(a.out, sweep_to_csv(rows));
    echo_config(a.out, {{"command", "sweep"},
                        {"data", a.data},
                        {"out", a.out},
                        {"nus", a.nus},
                        {"kernel", kernel_json(a.kernel)},
                        {"resolved_spec", spec_to_json(resolve_kernel_spec(kc, ds.groups))},
                        {"solver", {{"tol", a.solver.tol}, {"max_iter", a.solver.max_iter}}},
                        {"threads", thread_count()}});
    bool all_converged = true;
    for (const auto& r : rows) {
        out << "nu " << format_double(r.nu) << ": auc " << format_double(r.auc) << ", ap " << format_double(r.ap) << "\n";
        if (!r.converged) {
            all_converged = false;
            err << "nu " << format_double(r.nu) << " did not converge" << (r.error.empty() ? "" : ": " + r.error) << "\n";
        }
    }
    return all_converged ? kOk : kNoConvergence;
}

// ---- density ----

struct DensityArgs {
    std::string data;
    std::string kind = "kde";
    std::string out;
    std::string svg;
    std::size_t nodes = 101;
    double margin = 1.0;
    std::vector<double> lo;
    std::vector<double> hi;
    std::optional<double> sigma;
    double test_sigma = 0.0;
    double nu = 1.0;
    SolverFlags solver;
};

int cmd_density(const DensityArgs& a, std::ostream& out, std::ostream& err) {
    check_nu(a.nu);
    const GroupDataset ds = read_dataset(a.data);
    ds.validate();
    if (ds.dim() > 2) throw std::invalid_argument("density needs d <= 2");
    const GroupDataset means = collapse_to_means(ds);
    PointSet centers(static_cast<Eigen::Index>(means.size()), static_cast<Eigen::Index>(ds.dim()));
    for (std::size_t i = 0; i < means.size(); ++i) centers.row(static_cast<Eigen::Index>(i)) = means.groups[i].points.row(0);

    double sigma = 1.0;
    if (a.sigma) sigma = *a.sigma;
    else if (centers.rows() >= 2) {
        const double med = median_heuristic(means.groups);
        if (med > 0.0) sigma = std::sqrt(med);
    }

    DensityModel model = DensityModel::fixed_kde(centers, sigma);
    bool converged = true;
    if (a.kind == "balloon") {
        model = DensityModel::balloon(centers, sigma, a.test_sigma);
    } else if (a.kind == "sample-smoothing") {
        std::vector<double> sigmas;
        for (const auto& g : ds.groups) {
            const double w = g.omega && !g.omega->empty() ? g.omega->front() : 0.0;
            sigmas.push_back(std::sqrt(sigma * sigma + w));
        }
        model = DensityModel::sample_smoothing(centers, std::move(sigmas));
    } else if (a.kind == "ocsmm") {
        GroupKernelSpec spec;
        spec.embedding = MeanEmbedding::GaussianAnalytic;
        spec.outer = OuterKernel::Linear;
        spec.sigma = sigma;
        auto fitted = std::make_shared<const OcsmmModel>(OcsmmModel::fit(ds.groups, spec, a.nu, a.solver.config()));
        converged = fitted->report().converged;
        model = DensityModel::ocsmm(fitted, a.test_sigma, true);
    }

    GridSpec grid;
    if (!a.lo.empty() || !a.hi.empty()) {
        grid.lo = a.lo;
        grid.hi = a.hi;
        grid.nodes = a.nodes;
        if (grid.lo.size() != ds.dim() || grid.hi.size() != ds.dim())
            throw std::invalid_argument("--lo/--hi must have one value per dimension");
        grid.validate();
    } else {
        grid = bounding_grid(centers, a.margin, a.nodes);
    }

    const auto values = evaluate_on_grid([&](std::span<const double> y) { return model(y); }, grid);
    write_text(a.out, grid_to_csv(grid, values));
    if (!a.svg.empty()) {
        if (grid.dim() != 2) throw std::invalid_argument("--svg needs 2-D data");
        write_text(a.svg, svg_heatmap(grid, values, a.kind + " density"));
    }
    echo_config(a.out, {{"command", "density"},
                        {"data", a.data},
                        {"kind", a.kind},
                        {"out", a.out},
                        {"svg", a.svg},
                        {"nodes", grid.nodes},
                        {"lo", grid.lo},
                        {"hi", grid.hi},
                        {"sigma", sigma},
                        {"test_sigma", a.test_sigma},
                        {"nu", a.nu},
                        {"solver", {{"tol", a.solver.tol}, {"max_iter", a.solver.max_iter}}},
                        {"threads", thread_count()}});
    out << "mass " << format_double(trapezoid_integral(values, grid)) << " on " << grid.size() << " nodes\n";
    if (!converged) {
        err << "solver did not converge\n";
        return kNoConvergence;
    }
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"One-class support measure machines for group anomaly detection", "ocsmm"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "generate a synthetic dataset (JSONL)");
    s->add_option("generator", synth.generator, "rotated | mixture | circle | flower | injected")
        ->required()
        ->check(CLI::IsMember({"rotated", "mixture", "circle", "flower", "injected"}));
    s->add_option("--seed", synth.seed)->capture_default_str();
    s->add_option("--out", synth.out)->required();
    s->add_option("--n", synth.n, "points for circle/flower")->capture_default_str();
    s->add_option("--count", synth.count, "injected groups")->capture_default_str();
    s->add_option("--base-noise", synth.noise.base_noise, "variance of the shape noise")->capture_default_str();
    s->add_option("--omega-lo", synth.noise.omega_lo, "per-point variance, lower end")->capture_default_str();
    s->add_option("--omega-hi", synth.noise.omega_hi, "per-point variance, upper end")->capture_default_str();
    s->add_flag("--std-noise", synth.noise.base_noise_is_std, "read --base-noise as a standard deviation");
    s->add_flag("--std-omega", synth.noise.omega_is_std, "read the omega range as standard deviations");

    FitArgs fit;
    auto* f = app.add_subcommand("fit", "fit a model on a dataset");
    f->add_option("--data", fit.data)->required();
    f->add_option("--model-out", fit.model_out)->required();
    f->add_option("--scores-out", fit.scores_out, "also write training scores");
    add_kernel_flags(f, fit.kernel);
    add_solver_flags(f, fit.solver, true);

    ScoreArgs score;
    auto* sc = app.add_subcommand("score", "score a dataset with a saved model");
    sc->add_option("--model", score.model)->required();
    sc->add_option("--data", score.data)->required();
    sc->add_option("--out", score.out)->required();

    EvalArgs eval;
    auto* e = app.add_subcommand("eval", "AUC / AP / ROC against dataset labels");
    e->add_option("--scores", eval.scores, "scores CSV from `score`");
    e->add_option("--model", eval.model, "score on the fly instead");
    e->add_option("--data", eval.data, "labeled dataset")->required();
    e->add_option("--out", eval.out, "metrics CSV")->required();
    e->add_option("--roc-out", eval.roc_out, "ROC CSV (default: <out>.roc.csv)");
    e->add_option("--svg", eval.svg, "ROC plot");

    SweepArgs sweep;
    auto* sw = app.add_subcommand("sweep", "AUC / AP over a grid of nu");
    sw->add_option("--data", sweep.data)->required();
    sw->add_option("--out", sweep.out)->required();
    sw->add_option("--nus", sweep.nus, "default 0.1,...,0.9")->delimiter(',');
    add_kernel_flags(sw, sweep.kernel);
    add_solver_flags(sw, sweep.solver, false);

    DensityArgs dens;
    auto* d = app.add_subcommand("density", "density estimate on a grid");
    d->add_option("--data", dens.data)->required();
    d->add_option("--kind", dens.kind)
        ->check(CLI::IsMember({"kde", "balloon", "sample-smoothing", "ocsmm"}))
        ->capture_default_str();
    d->add_option("--out", dens.out, "grid CSV")->required();
    d->add_option("--svg", dens.svg, "heat map");
    d->add_option("--nodes", dens.nodes, "per axis")->capture_default_str()->check(CLI::Range(2, 5001));
    d->add_option("--margin", dens.margin)->capture_default_str();
    d->add_option("--lo", dens.lo)->delimiter(',');
    d->add_option("--hi", dens.hi)->delimiter(',');
    d->add_option("--sigma", dens.sigma, "bandwidth (default: median heuristic)")->check(CLI::PositiveNumber);
    d->add_option("--test-sigma", dens.test_sigma)->capture_default_str();
    d->add_option("--nu", dens.nu, "for --kind ocsmm")->capture_default_str();
    add_solver_flags(d, dens.solver, false);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (s->parsed()) return cmd_synth(synth, out);
        if (f->parsed()) return cmd_fit(fit, out, err);
        if (sc->parsed()) return cmd_score(score, out);
        if (e->parsed()) return cmd_eval(eval, out);
        if (sw->parsed()) return cmd_sweep(sweep, out, err);
        if (d->parsed()) return cmd_density(dens, out, err);
    } catch (const NumericalError& ex) {
        err << "numerical error: " << ex.what() << "\n";
        return kNoConvergence;
    } catch (const ParseError& ex) {
        err << "input error";
        if (ex.line() > 0) err << " (line " << ex.line() << ")";
        err << ": " << ex.what() << "\n";
        return kUsage;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

} // namespace ocsmm::cli

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <CLI11.hpp>
#include <openssl/evp.h>
#include <groupsparse/groupsparse.hpp>

namespace gs = groupsparse;
using gs::io::json;

namespace {

enum Exit : int { ok = 0, claim_failed = 1, solver_failure = 2, invalid_input = 3, usage = 64 };

/// Options shared by every subcommand. Precedence: flag > --config file > GROUPSPARSE_SEED > default.
struct Common
{
    std::uint64_t seed = 0;
    double grad_tol = 1e-10;
    std::size_t max_iters = 100000;
    std::size_t restarts = 3;
    double delta = 1e-2;
    std::size_t jobs = 1;
    std::string config_path;

    std::map<std::string, CLI::Option*> flags;

    void attach(CLI::App& app)
    {
        flags["seed"] = app.add_option("--seed", seed, "random seed (falls back to GROUPSPARSE_SEED)");
        flags["grad_tol"] = app.add_option("--grad-tol", grad_tol, "relative gradient / KKT tolerance");
        flags["max_iters"] = app.add_option("--max-iters", max_iters, "iteration cap for inner solvers");
        flags["restarts"] = app.add_option("--restarts", restarts, "random restarts for the attention solver");
        flags["delta"] = app.add_option("--delta", delta, "relative offset below the threshold, lambda = (1 - delta) tau");
        flags["jobs"] = app.add_option("--jobs", jobs, "worker threads for verify trials");
        app.add_option("--config", config_path, "JSON file with any of the option names above (underscored)");
    }

    void resolve()
    {
        json cfg = json::object();
        if (!config_path.empty()) {
            cfg = gs::io::read_json(config_path);
            if (!cfg.is_object()) throw gs::io::InputError("--config: expected a JSON object");
        }
        auto take = [&](const char* key, auto& field) {
            if (flags[key]->count() == 0 && cfg.contains(key)) {
                try {
                    cfg.at(key).get_to(field);
                } catch (const json::exception& e) {
                    throw gs::io::InputError(std::string("--config: bad value for '") + key + "': " + e.what());
                }
            }
        };
        take("grad_tol", grad_tol);
        take("max_iters", max_iters);
        take("restarts", restarts);
        take("delta", delta);
        take("jobs", jobs);
        if (flags["seed"]->count() == 0) {
            if (cfg.contains("seed")) {
                take("seed", seed);
            } else if (const char* env = std::getenv("GROUPSPARSE_SEED")) {
                try {
                    seed = std::stoull(env);
                } catch (const std::exception&) {
                    throw gs::io::InputError(std::string("GROUPSPARSE_SEED is not an integer: ") + env);
                }
            }
        }
    }

    gs::SolverConfig solver() const
    {
        gs::SolverConfig c;
        c.grad_tol = grad_tol;
        c.max_iters = max_iters;
        c.restarts = restarts;
        c.seed = seed;
        c.validate();
        return c;
    }

    json snapshot() const
    {
        return {{"seed", seed}, {"grad_tol", grad_tol}, {"max_iters", max_iters},
                {"restarts", restarts}, {"delta", delta}, {"jobs", jobs}};
    }
};

std::string sha256_file(const std::string& path)
{
    const std::string data = gs::io::read_file(path);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed for '" + path + "'");
    }
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return out.str();
}

std::string utc_now()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

/// Replay record written next to the main output.
struct Manifest
{
    std::string command;
    std::vector<std::string> argv;
    json config;
    std::uint64_t seed = 0;
    std::string started = utc_now();
    std::map<std::string, std::string> inputs;
    std::vector<std::string> outputs;

    void add_input(const std::string& path) { inputs[path] = sha256_file(path); }

    void write(const std::string& path) const
    {
        json in = json::object();
        for (const auto& [p, d] : inputs) in[p] = {{"sha256", d}};
        const json j{{"command", command}, {"argv", argv},     {"config", config},    {"seed", seed},
                     {"started", started}, {"finished", utc_now()}, {"inputs", in}, {"outputs", outputs}};
        gs::io::write_file(path, j.dump(2) + "\n");
    }
};

std::string manifest_path(const std::string& out, const std::string& explicit_path)
{
    if (!explicit_path.empty()) return explicit_path;
    std::string stem = out;
    if (stem.size() > 5 && stem.substr(stem.size() - 5) == ".json") stem.resize(stem.size() - 5);
    return stem + ".manifest.json";
}

void emit(const std::string& path, const std::string& content, Manifest& m)
{
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    gs::io::write_file(path, content);
    m.outputs.push_back(path);
}

json selection_report(const std::string& algo, std::size_t k, std::size_t kprime, const gs::SelectionResult& r)
{
    json trace = json::array();
    for (const auto& rec : r.trace.iterations) trace.push_back(gs::io::trace_record_to_json(rec));
    return {{"algorithm", algo},
            {"k", k},
            {"kprime", kprime},
            {"selected", r.selected},
            {"objective", gs::io::round12(r.objective)},
            {"beta", gs::io::vector_to_json(r.beta, true)},
            {"stopped_early", r.trace.stopped_early},
            {"ompr_regime", gs::io::optional_json(r.trace.ompr_regime)},
            {"trace", trace}};
}

// ---------------------------------------------------------------------------

struct GenArgs
{
    std::string kind = "least_squares";
    std::string out;
    std::string csv;
    std::size_t t_min = 3, t_max = 10, n_max = 40, m_max = 60;
    std::size_t n = 12, t = 6;
    double spread = 0.3;
    std::size_t rows = 8, cols = 5, k = 2;
    std::string loss = "frobenius";
    double ridge = 0;
    double huber_delta = 1.0;
};

int cmd_gen(const GenArgs& a, const Common& c, Manifest& m)
{
    gs::Instance inst;
    gs::gen::Shape shape{a.t_min, a.t_max, a.n_max, a.m_max};
    if (a.kind == "least_squares") inst = gs::gen::ridge_least_squares(c.seed, shape);
    else if (a.kind == "logistic") inst = gs::gen::ridge_logistic(c.seed, shape);
    else if (a.kind == "quadratic") inst = gs::gen::random_quadratic(c.seed, a.n, a.t);
    else if (a.kind == "conditioned") inst = gs::gen::conditioned_quadratic(c.seed, a.n, a.t, a.spread);
    else if (a.kind == "css")
        inst = gs::gen::css_matrix(c.seed, a.rows, a.cols, gs::css::parse_loss(a.loss), a.ridge, a.huber_delta, a.k);
    else throw gs::ContractError("gen: unknown kind '" + a.kind + "'");
    emit(a.out, gs::instance_to_json(inst).dump(2) + "\n", m);
    if (!a.csv.empty()) {
        if (inst.X.size() == 0) throw gs::ContractError("gen: --csv needs an instance with a data matrix");
        emit(a.csv, gs::io::to_csv(inst.X), m);
    }
    return ok;
}

struct SelectArgs
{
    std::string instance;
    std::string algo = "omp";
    std::size_t k = 1;
    std::optional<std::size_t> kprime;
    std::size_t rounds = 0;
    std::string out, trace, csv, manifest;
};

gs::SelectionResult run_algorithm(const std::string& algo, const gs::Objective& obj, const gs::GroupPartition& p,
                                  std::size_t k, std::size_t kprime, std::size_t rounds, const Common& c)
{
    const auto cfg = c.solver();
    if (algo == "omp") return gs::group_omp(obj, p, k, kprime, cfg);
    if (algo == "ompr") {
        gs::OmprOptions o;
        o.rounds = rounds;
        return gs::group_ompr(obj, p, k, kprime, o, cfg);
    }
    gs::SequentialOptions so;
    so.delta = c.delta;
    so.restarts = c.restarts;
    if (algo == "seq-lasso") return gs::sequential_lasso(obj, p, kprime, cfg, so);
    if (algo == "seq-attention") return gs::sequential_attention(obj, p, kprime, cfg, so);
    throw gs::ContractError("unknown algorithm '" + algo + "' (omp, ompr, seq-lasso, seq-attention)");
}

void write_trace_files(const gs::SelectionTrace& t, const std::string& jsonl, const std::string& csv, Manifest& m)
{
    if (!jsonl.empty()) emit(jsonl, gs::io::trace_to_jsonl(t), m);
    if (!csv.empty()) emit(csv, gs::io::trace_to_csv(t), m);
}

int cmd_select(const SelectArgs& a, const Common& c, Manifest& m)
{
    m.add_input(a.instance);
    const auto inst = gs::load_instance(a.instance);
    const auto obj = inst.make_objective();
    const std::size_t kprime = a.kprime.value_or(a.k);
    const auto res = run_algorithm(a.algo, *obj, *inst.partition, a.k, kprime, a.rounds, c);
    emit(a.out, selection_report(a.algo, a.k, kprime, res).dump(2) + "\n", m);
    write_trace_files(res.trace, a.trace, a.csv, m);
    return ok;
}

struct CssArgs
{
    std::string matrix;
    std::size_t k = 1;
    std::optional<std::size_t> kprime;
    std::string algo = "omp";
    std::string loss = "frobenius";
    std::optional<double> ridge;
    double huber_delta = 1.0;
    std::size_t rounds = 0;
    std::string out, trace, csv, manifest;
};

int cmd_css(const CssArgs& a, const Common& c, Manifest& m)
{
    m.add_input(a.matrix);
    gs::css::CssInstance inst;
    inst.X = gs::io::load_matrix(a.matrix);
    inst.loss = gs::css::parse_loss(a.loss);
    inst.ridge = a.ridge.value_or(gs::default_ridge(inst.X));
    inst.huber_delta = a.huber_delta;
    inst.k = a.k;
    if (a.k > static_cast<std::size_t>(inst.X.cols())) throw gs::ContractError("css: k exceeds the number of columns");
    const std::size_t kprime = a.kprime.value_or(a.k);
    const auto algo = gs::css::parse_algorithm(a.algo);
    const auto res = gs::css::css_select(inst, algo, kprime, c.solver(), a.rounds);
    json V = json::array();
    for (gs::index_t r = 0; r < res.V.rows(); ++r) V.push_back(gs::io::vector_to_json(res.V.row(r).transpose(), true));
    json report{{"algorithm", a.algo},
                {"loss", gs::css::to_string(inst.loss)},
                {"ridge", gs::io::round12(inst.ridge)},
                {"k", a.k},
                {"kprime", kprime},
                {"columns", res.columns},
                {"value", gs::io::round12(res.value)},
                {"V", V}};
    if (inst.loss == gs::css::Loss::frobenius && inst.ridge == 0) {
        report["projection_residual"] = gs::io::round12(gs::css::projection_residual(inst.X, res.columns));
    }
    emit(a.out, report.dump(2) + "\n", m);
    write_trace_files(res.trace, a.trace, a.csv, m);
    return ok;
}

struct VerifyArgs
{
    std::string claim;
    std::size_t trials = 0;
    std::string family = "least_squares";
    std::size_t k = 0;
    std::string out, manifest;
};

int cmd_verify(const VerifyArgs& a, const Common& c, Manifest& m)
{
    namespace v = gs::verify;
    const auto cfg = c.solver();
    v::ClaimReport rep;
    if (a.claim == "equivalence" || a.claim == "attention") {
        v::Generator generate;
        if (a.family == "least_squares") generate = [](std::uint64_t s) { return gs::gen::ridge_least_squares(s); };
        else if (a.family == "logistic") generate = [](std::uint64_t s) { return gs::gen::ridge_logistic(s); };
        else if (a.family == "pseudo_huber")
            generate = [](std::uint64_t s) { return gs::gen::css_matrix(s, 8, 5, gs::css::Loss::pseudo_huber, 0.0, 1.0, 2); };
        else throw gs::ContractError("verify: unknown family '" + a.family + "' (least_squares, logistic, pseudo_huber)");
        if (a.claim == "equivalence") {
            v::EquivalenceOptions o;
            o.trials = a.trials ? a.trials : o.trials;
            o.seed = c.seed;
            o.jobs = c.jobs;
            o.delta = c.delta;
            o.cfg = cfg;
            rep = v::certify_equivalence(generate, o);
        } else {
            v::AttentionOptions o;
            o.trials = a.trials ? a.trials : o.trials;
            o.seed = c.seed;
            o.jobs = c.jobs;
            o.restarts = c.restarts;
            o.cfg = cfg;
            rep = v::certify_attention_equivalence(generate, o);
        }
    } else if (a.claim == "omp") {
        v::OmpGuaranteeOptions o;
        o.k = a.k ? a.k : o.k;
        o.trials = a.trials ? a.trials : o.trials;
        o.seed = c.seed;
        o.jobs = c.jobs;
        o.cfg = cfg;
        rep = v::certify_omp_guarantees([](std::uint64_t s) { return gs::gen::random_quadratic(s, 12, 6); }, o);
    } else if (a.claim == "ompr") {
        v::OmprGuaranteeOptions o;
        o.k = a.k ? a.k : o.k;
        o.trials = a.trials ? a.trials : o.trials;
        o.seed = c.seed;
        o.jobs = c.jobs;
        o.cfg = cfg;
        rep = v::certify_ompr_guarantees([](std::uint64_t s) { return gs::gen::conditioned_quadratic(s, 24, 12, 0.2); }, o);
    } else {
        throw gs::ContractError("verify: unknown claim '" + a.claim + "' (equivalence, omp, ompr, attention)");
    }
    emit(a.out, v::report_to_json(rep).dump(2) + "\n", m);
    std::cerr << rep.claim << ": " << rep.passes << "/" << rep.instances << " instances passed\n";
    return rep.all_passed() ? ok : claim_failed;
}

struct BenchArgs
{
    std::size_t trials = 5;
    std::size_t t = 10;
    std::size_t kprime = 3;
    std::string out;
};

/// Wall time per algorithm on generated least-squares instances, as CSV.
int cmd_bench(const BenchArgs& a, const Common& c, Manifest& m)
{
    std::ostringstream csv;
    csv.precision(6);
    csv << "algorithm,trial,t,n,kprime,seconds,objective\n";
    gs::gen::Shape shape;
    shape.t_min = shape.t_max = a.t;
    shape.n_max = std::max(shape.n_max, a.t);
    for (std::size_t i = 0; i < a.trials; ++i) {
        const auto inst = gs::gen::ridge_least_squares(gs::verify::trial_seed(c.seed, i), shape);
        const auto obj = inst.make_objective();
        const auto& p = *inst.partition;
        const std::size_t kp = std::min(a.kprime, p.t());
        for (const std::string algo : {"omp", "ompr", "seq-lasso", "seq-attention"}) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto res = run_algorithm(algo, *obj, p, kp, kp, kp, c);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            csv << algo << ',' << i << ',' << p.t() << ',' << p.n() << ',' << kp << ',' << secs << ','
                << gs::io::round12(res.objective) << '\n';
        }
    }
    emit(a.out, csv.str(), m);
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Group-sparse selection: OMP, OMPR, sequential LASSO / attention, column subset selection"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "groupsparse 0.1.0");

    Common common;
    Manifest manifest;
    for (int i = 0; i < argc; ++i) manifest.argv.emplace_back(argv[i]);

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "write a seeded random instance");
    common.attach(*gen);
    gen->add_option("--kind", ga.kind, "least_squares | logistic | quadratic | conditioned | css")->capture_default_str();
    gen->add_option("--out", ga.out, "instance JSON path (stdout when omitted)");
    gen->add_option("--csv", ga.csv, "also write the data matrix X as CSV");
    gen->add_option("--t-min", ga.t_min)->capture_default_str();
    gen->add_option("--t-max", ga.t_max)->capture_default_str();
    gen->add_option("--n-max", ga.n_max)->capture_default_str();
    gen->add_option("--m-max", ga.m_max)->capture_default_str();
    gen->add_option("--n", ga.n, "dimension (quadratic, conditioned)")->capture_default_str();
    gen->add_option("--t", ga.t, "groups (quadratic, conditioned)")->capture_default_str();
    gen->add_option("--spread", ga.spread, "Hessian spread in [0,1) (conditioned)")->capture_default_str();
    gen->add_option("--rows", ga.rows)->capture_default_str();
    gen->add_option("--cols", ga.cols)->capture_default_str();
    gen->add_option("--k", ga.k, "target columns (css)")->capture_default_str();
    gen->add_option("--loss", ga.loss, "frobenius | pseudo-huber (css)")->capture_default_str();
    gen->add_option("--ridge", ga.ridge, "ridge (css)")->capture_default_str();
    gen->add_option("--huber-delta", ga.huber_delta)->capture_default_str();

    SelectArgs sa;
    auto* sel = app.add_subcommand("select", "run a selection algorithm on an instance file");
    common.attach(*sel);
    sel->add_option("--instance", sa.instance, "instance JSON")->required();
    sel->add_option("--algo", sa.algo, "omp | ompr | seq-lasso | seq-attention")->capture_default_str();
    sel->add_option("--k", sa.k, "target sparsity")->capture_default_str();
    sel->add_option("--kprime", sa.kprime, "groups to select (default k)");
    sel->add_option("--rounds", sa.rounds, "OMPR swap rounds")->capture_default_str();
    sel->add_option("--out", sa.out, "report JSON path (stdout when omitted)");
    sel->add_option("--trace", sa.trace, "per-round trace, JSON lines");
    sel->add_option("--csv", sa.csv, "per-round summary CSV");
    sel->add_option("--manifest", sa.manifest, "run manifest path (default <out>.manifest.json)");

    CssArgs ca;
    auto* css = app.add_subcommand("css", "column subset selection on a matrix");
    common.attach(*css);
    css->add_option("--matrix", ca.matrix, "matrix as CSV or {m, n, data} JSON")->required();
    css->add_option("--k", ca.k, "columns to select")->capture_default_str();
    css->add_option("--kprime", ca.kprime, "columns to select when running bicriteria (default k)");
    css->add_option("--algo", ca.algo, "omp | ompr | seq-lasso | seq-attention")->capture_default_str();
    css->add_option("--loss", ca.loss, "frobenius | pseudo-huber")->capture_default_str();
    css->add_option("--ridge", ca.ridge, "ridge on V (default 1e-6 * ||X||_F^2 / d)");
    css->add_option("--huber-delta", ca.huber_delta)->capture_default_str();
    css->add_option("--rounds", ca.rounds, "OMPR swap rounds")->capture_default_str();
    css->add_option("--out", ca.out, "report JSON path (stdout when omitted)");
    css->add_option("--trace", ca.trace, "per-round trace, JSON lines");
    css->add_option("--csv", ca.csv, "per-round summary CSV");
    css->add_option("--manifest", ca.manifest, "run manifest path (default <out>.manifest.json)");

    VerifyArgs va;
    auto* ver = app.add_subcommand("verify", "certify a claim over seeded random instances");
    common.attach(*ver);
    ver->add_option("--claim", va.claim, "equivalence | omp | ompr | attention")->required();
    ver->add_option("--trials", va.trials, "number of instances (claim default when omitted)");
    ver->add_option("--family", va.family, "instances for equivalence/attention: least_squares | logistic | pseudo_huber")
        ->capture_default_str();
    ver->add_option("--k", va.k, "sparsity for omp/ompr (claim default when omitted)");
    ver->add_option("--out", va.out, "report JSON path (stdout when omitted)");
    ver->add_option("--manifest", va.manifest, "run manifest path (default <out>.manifest.json)");

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "time every algorithm on generated instances");
    common.attach(*bench);
    bench->add_option("--trials", ba.trials)->capture_default_str();
    bench->add_option("--t", ba.t, "groups per instance")->capture_default_str();
    bench->add_option("--kprime", ba.kprime)->capture_default_str();
    bench->add_option("--out", ba.out, "CSV path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return usage;
    }

    try {
        common.resolve();
        manifest.config = common.snapshot();
        manifest.seed = common.seed;
        std::string out, explicit_manifest;
        int code = ok;
        if (gen->parsed()) {
            manifest.command = "gen";
            out = ga.out;
            code = cmd_gen(ga, common, manifest);
        } else if (sel->parsed()) {
            manifest.command = "select";
            out = sa.out;
            explicit_manifest = sa.manifest;
            code = cmd_select(sa, common, manifest);
        } else if (css->parsed()) {
            manifest.command = "css";
            out = ca.out;
            explicit_manifest = ca.manifest;
            code = cmd_css(ca, common, manifest);
        } else if (ver->parsed()) {
            manifest.command = "verify";
            out = va.out;
            explicit_manifest = va.manifest;
            code = cmd_verify(va, common, manifest);
        } else if (bench->parsed()) {
            manifest.command = "bench";
            out = ba.out;
            code = cmd_bench(ba, common, manifest);
        }
        if (!out.empty() && out != "-") {
            manifest.write(manifest_path(out, explicit_manifest));
        }
        return code;
    } catch (const gs::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return solver_failure;
    } catch (const gs::SelectionError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return solver_failure;
    } catch (const gs::io::InputError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return invalid_input;
    } catch (const gs::ContractError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return invalid_input;
    } catch (const json::exception& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return invalid_input;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return solver_failure;
    }
}

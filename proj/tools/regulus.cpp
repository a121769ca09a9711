// regulus: reductions between weighted/unweighted and irregular/regular CSP
// instances, with assignment pull-back, baseline solvers, and verification.

#include "regulus/formats.hpp"
#include "regulus/pipeline.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <iostream>

using namespace regulus;
using nlohmann::json;

namespace {

std::string stem_of(const std::string& path) {
    const std::size_t dot = path.find_last_of('.');
    const std::size_t slash = path.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path;
    return path.substr(0, dot);
}

EvalBudget budget_from_bits(int bits) {
    EvalBudget b;
    b.max_assignments = std::uint64_t{1} << bits;
    return b;
}

RegularSolver solver_from_name(const std::string& name) {
    if (name == "brute")
        return RegularSolver::brute();
    if (name == "random")
        return RegularSolver::random();
    if (name == "greedy")
        return RegularSolver::greedy();
    throw Error("unknown solver '" + name + "'");
}

ParamProfile profile_from_name(const std::string& name) {
    if (name == "paper")
        return paper_profile();
    if (name == "test")
        return test_profile();
    throw Error("unknown profile '" + name + "'");
}

int run(int argc, char** argv) {
    CLI::App app{"CSP reductions: de-weighting, regularization, pull-back, verification"};
    app.require_subcommand(1);

    std::string in_path, out_path, report_path, map_path, cert_path, asn_path;

    // --- solve ---
    auto* solve_cmd = app.add_subcommand("solve", "solve an instance with a baseline method");
    std::string method = "brute", goal_name = "max";
    int budget_bits = 24;
    solve_cmd->add_option("--method", method, "brute|random|greedy")
        ->check(CLI::IsMember({"brute", "random", "greedy"}));
    solve_cmd->add_option("--goal", goal_name, "max|min")->check(CLI::IsMember({"max", "min"}));
    solve_cmd->add_option("--budget-bits", budget_bits, "brute-force budget as log2(assignments)");
    solve_cmd->add_option("--out", asn_path, "assignment output (.asn)");
    solve_cmd->add_option("input", in_path, "instance (.csp)")->required();

    // --- reduce-weights ---
    auto* rw_cmd = app.add_subcommand("reduce-weights", "replicate a weighted instance to an unweighted one");
    double epsilon = 0.1;
    rw_cmd->add_option("--epsilon", epsilon, "per-assignment value tolerance")->required();
    rw_cmd->add_option("input", in_path)->required();
    rw_cmd->add_option("output", out_path)->required();

    // --- min-scale ---
    auto* ms_cmd = app.add_subcommand("min-scale", "light/medium/heavy preprocessing for Min instances");
    double delta = 0.5, alpha = 1.0;
    ms_cmd->add_option("--delta", delta)->required();
    ms_cmd->add_option("--alpha", alpha);
    ms_cmd->add_option("--budget-bits", budget_bits);
    ms_cmd->add_option("input", in_path)->required();
    ms_cmd->add_option("output", out_path)->required();

    // --- regularize ---
    auto* reg_cmd = app.add_subcommand("regularize", "make every variable degree equal");
    bool det = false, rand_mode = false;
    std::uint64_t seed = 0;
    std::string profile_name;
    reg_cmd->add_flag("--det", det, "deterministic block construction");
    reg_cmd->add_flag("--rand", rand_mode, "randomized sampling construction");
    reg_cmd->add_option("--epsilon", epsilon)->required();
    reg_cmd->add_option("--seed", seed);
    reg_cmd->add_option("--profile", profile_name, "paper|test (default: REGULUS_PROFILE or paper)");
    reg_cmd->add_option("input", in_path)->required();
    reg_cmd->add_option("output", out_path)->required();

    // --- pipeline ---
    auto* pipe_cmd = app.add_subcommand("pipeline", "end-to-end approximation pipelines");
    pipe_cmd->require_subcommand(1);
    auto* pipe_max = pipe_cmd->add_subcommand("max", "maximization pipeline");
    auto* pipe_min = pipe_cmd->add_subcommand("min", "minimization pipeline");
    std::string solver_name_opt = "brute", mode_name = "det";
    for (CLI::App* p : {pipe_max, pipe_min}) {
        p->add_option("--delta", delta)->required();
        p->add_option("--solver", solver_name_opt)->check(CLI::IsMember({"brute", "random", "greedy"}));
        p->add_option("--seed", seed);
        p->add_option("--report", report_path, "write the JSON report here");
        p->add_option("--out", asn_path, "assignment output (.asn)");
        p->add_option("--budget-bits", budget_bits);
        p->add_option("input", in_path)->required();
    }
    pipe_max->add_option("--mode", mode_name)->check(CLI::IsMember({"det", "rand"}));
    pipe_max->add_option("--profile", profile_name);
    pipe_min->add_option("--alpha", alpha);

    // --- verify ---
    auto* ver_cmd = app.add_subcommand("verify", "audit a reduction output against its map");
    int samples = 100;
    double ver_eps = 0.25;
    double pass_rate = 0.95;
    ver_cmd->add_option("source", in_path, "original instance")->required();
    ver_cmd->add_option("reduced", out_path, "reduced instance")->required();
    ver_cmd->add_option("--map", map_path)->required();
    ver_cmd->add_option("--cert", cert_path);
    ver_cmd->add_option("--samples", samples);
    ver_cmd->add_option("--seed", seed);
    ver_cmd->add_option("--epsilon", ver_eps);
    ver_cmd->add_option("--goal", goal_name)->check(CLI::IsMember({"max", "min"}));
    ver_cmd->add_option("--pass-rate", pass_rate, "required pull-back sample pass rate");
    ver_cmd->add_option("--report", report_path);

    // --- generate ---
    auto* gen_cmd = app.add_subcommand("generate", "seeded random instances");
    std::string family = "random-mixed", weights_name = "uniform";
    int n = 5, m = 8, k = 3;
    gen_cmd->add_option("--family", family)
        ->check(CLI::IsMember({"random-ksat", "random-maxcut", "random-mixed"}));
    gen_cmd->add_option("-n", n);
    gen_cmd->add_option("-m", m);
    gen_cmd->add_option("--k", k, "clause width for random-ksat");
    gen_cmd->add_option("--seed", seed);
    gen_cmd->add_option("--weights", weights_name)->check(CLI::IsMember({"uniform", "dirichlet"}));
    gen_cmd->add_option("output", out_path)->required();

    // --- convert ---
    auto* conv_cmd = app.add_subcommand("convert", "import foreign formats");
    bool from_dimacs = false;
    conv_cmd->add_flag("--from-dimacs", from_dimacs, "input is DIMACS CNF");
    conv_cmd->add_option("input", in_path)->required();
    conv_cmd->add_option("output", out_path)->required();

    CLI11_PARSE(app, argc, argv);

    if (solve_cmd->parsed()) {
        const Instance f = parse_instance(read_file(in_path));
        const Goal goal = goal_name == "max" ? Goal::max : Goal::min;
        SolveResult res;
        if (method == "brute")
            res = brute_force_opt(f, goal, budget_from_bits(budget_bits));
        else if (method == "random")
            res = random_baseline(f, goal);
        else
            res = greedy_baseline(f, goal);
        std::cout << res.method << (res.exact ? " (exact)" : "") << " value: " << res.value << "\n";
        const std::string out = asn_path.empty() ? stem_of(in_path) + ".asn" : asn_path;
        write_file(out, serialize_assignment(res.assignment));
        std::cout << "assignment written to " << out << "\n";
    } else if (rw_cmd->parsed()) {
        const Instance f = parse_instance(read_file(in_path));
        auto [g, plan] = replicate_to_unweighted(f, epsilon);
        write_file(out_path, serialize_instance(g));
        write_file(stem_of(out_path) + ".plan.json", to_json(plan).dump(2) + "\n");
        std::cout << "replicated " << f.num_constraints() << " constraints into " << plan.q_total
                  << "\n";
    } else if (ms_cmd->parsed()) {
        const Instance f = parse_instance(read_file(in_path));
        MinPreprocessResult res =
            min_preprocess_scale(f, delta, alpha, budget_from_bits(budget_bits));
        if (std::holds_alternative<ZeroCertificate>(res)) {
            const ZeroCertificate& zero = std::get<ZeroCertificate>(res);
            write_file(stem_of(out_path) + ".asn", serialize_assignment(zero.assignment));
            write_file(stem_of(out_path) + ".plan.json",
                       json{{"type", "zero_certificate"}}.dump(2) + "\n");
            std::cout << "optimum is 0; witness written to " << stem_of(out_path) << ".asn\n";
        } else {
            const auto& [fprime, plan] = std::get<std::pair<Instance, MinScalePlan>>(res);
            write_file(out_path, serialize_instance(fprime));
            write_file(stem_of(out_path) + ".plan.json", to_json(plan).dump(2) + "\n");
            std::cout << "kept " << fprime.num_constraints() << " of " << f.num_constraints()
                      << " constraints (k = " << plan.k << ", sigma = " << plan.sigma << ")\n";
        }
    } else if (reg_cmd->parsed()) {
        if (det == rand_mode)
            throw Error("pick exactly one of --det / --rand");
        const Instance f = parse_instance(read_file(in_path));
        const ParamProfile profile =
            profile_name.empty() ? profile_from_env() : profile_from_name(profile_name);
        if (det) {
            auto [g, map] = regularize_deterministic(f, epsilon);
            write_file(out_path, serialize_instance(g));
            write_file(stem_of(out_path) + ".map.json", to_json(map).dump() + "\n");
            write_file(stem_of(out_path) + ".cert.json",
                       json{{"type", "deterministic_regularization"},
                            {"epsilon", epsilon},
                            {"N", map.N},
                            {"num_good", map.num_good}}
                               .dump(2) +
                           "\n");
            std::cout << "N = " << map.N << ", good blocks = " << map.num_good << "\n";
        } else {
            RandomizedRegularization reg = regularize_randomized(f, epsilon, seed, profile);
            write_file(out_path, serialize_instance(reg.instance));
            write_file(stem_of(out_path) + ".map.json", to_json(reg.map).dump() + "\n");
            write_file(stem_of(out_path) + ".cert.json", to_json(reg.certificate).dump(2) + "\n");
            std::cout << "Delta = " << reg.map.Delta << ", constraints = "
                      << reg.instance.num_constraints() << ", trials = "
                      << reg.certificate.trials_attempted << "\n";
        }
    } else if (pipe_max->parsed() || pipe_min->parsed()) {
        const Instance f = parse_instance(read_file(in_path));
        PipelineOptions opt;
        opt.delta = delta;
        opt.solver = solver_from_name(solver_name_opt);
        opt.seed = seed;
        opt.report_budget = budget_from_bits(budget_bits);
        opt.oracle_budget = budget_from_bits(budget_bits);
        PipelineResult result;
        if (pipe_max->parsed()) {
            opt.mode = mode_name == "det" ? RegularizeMode::det : RegularizeMode::rand;
            opt.profile = profile_name.empty() ? profile_from_env() : profile_from_name(profile_name);
            result = pipeline_max(f, opt);
        } else {
            opt.alpha = alpha;
            opt.solver.alpha = alpha;
            result = pipeline_min(f, opt);
        }
        std::cout << "value: " << result.report.value;
        if (result.report.brute_opt)
            std::cout << " (optimum " << *result.report.brute_opt << ")";
        std::cout << ", claimed bound: " << result.report.claimed_bound << "\n";
        if (result.report.guarantee_void)
            std::cout << "warning: heavy-constraint audit failed; bound void\n";
        if (!report_path.empty())
            write_file(report_path, result.report.to_json().dump(2) + "\n");
        if (!asn_path.empty())
            write_file(asn_path, serialize_assignment(result.assignment));
    } else if (ver_cmd->parsed()) {
        const Instance f = parse_instance(read_file(in_path));
        const Instance g = parse_instance(read_file(out_path));
        const json map_json = json::parse(read_file(map_path));
        ReductionMap map;
        if (map_json.at("type") == "block")
            map = block_map_from_json(map_json);
        else
            map = copy_map_from_json(map_json);
        ReductionCertificate cert;
        bool have_cert = false;
        if (!cert_path.empty()) {
            const json cert_json = json::parse(read_file(cert_path));
            if (cert_json.value("type", "") == "randomized_regularization") {
                cert = certificate_from_json(cert_json);
                have_cert = true;
            }
        }
        VerifyOptions vopt;
        vopt.samples = samples;
        vopt.seed = seed;
        vopt.epsilon = ver_eps;
        vopt.goal = goal_name == "max" ? Goal::max : Goal::min;
        vopt.min_value_pass_rate = pass_rate;
        const VerifyReport rep = verify(f, g, map, have_cert ? &cert : nullptr, vopt);
        for (const CheckResult& c : rep.checks)
            std::cout << (c.skipped ? "[skip] " : (c.pass ? "[pass] " : "[FAIL] ")) << c.name
                      << (c.details.empty() ? "" : " (" + c.details + ")") << "\n";
        if (!report_path.empty())
            write_file(report_path, rep.to_json().dump(2) + "\n");
        if (!rep.all_passed())
            return 1;
    } else if (gen_cmd->parsed()) {
        GeneratorSpec spec;
        spec.family = family == "random-ksat"
                          ? GeneratorFamily::random_ksat
                          : (family == "random-maxcut" ? GeneratorFamily::random_maxcut
                                                       : GeneratorFamily::random_mixed);
        spec.n = n;
        spec.m = m;
        spec.k = k;
        spec.seed = seed;
        spec.weight_mode = weights_name == "dirichlet" ? WeightMode::dirichlet : WeightMode::uniform;
        write_file(out_path, serialize_instance(generate(spec)));
        std::cout << "wrote " << out_path << "\n";
    } else if (conv_cmd->parsed()) {
        if (!from_dimacs)
            throw Error("convert currently supports --from-dimacs only");
        write_file(out_path, serialize_instance(parse_dimacs(read_file(in_path))));
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ReductionFailure& e) {
        std::cerr << "reduction failure: " << e.what() << "\n";
        return 2;
    } catch (const BudgetExceeded& e) {
        std::cerr << "oracle inconclusive: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

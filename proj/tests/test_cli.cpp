// End-to-end checks of the command-line tool: artifacts land where promised
// and exit codes follow the documented contract (0 ok, 2 reduction failure,
// 3 inconclusive/budget, 1 other errors).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "regulus/formats.hpp"

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <sys/wait.h>

using namespace regulus;
namespace fs = std::filesystem;

namespace {

const std::string cli = REGULUS_CLI_PATH;
const std::string data = REGULUS_DATA_DIR;

struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::path("cli_scratch") / std::to_string(::getpid());
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all("cli_scratch"); }
    std::string operator()(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args) {
    const int status = std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("cli: generate, solve, convert") {
    Scratch tmp;
    CHECK(run("generate --family random-mixed -n 5 -m 8 --seed 3 --weights dirichlet " +
              tmp("gen.csp")) == 0);
    const Instance gen = parse_instance(read_file(tmp("gen.csp")));
    CHECK(gen.weighted);
    CHECK(gen.num_constraints() == 8);

    CHECK(run("solve --method brute --goal max --out " + tmp("gen.asn") + " " + tmp("gen.csp")) ==
          0);
    const Assignment chi = parse_assignment(read_file(tmp("gen.asn")));
    CHECK(static_cast<int>(chi.size()) == 5);

    CHECK(run("convert --from-dimacs " + data + "/sample.cnf " + tmp("cnf.csp")) == 0);
    CHECK(parse_instance(read_file(tmp("cnf.csp"))).num_constraints() == 6);
}

TEST_CASE("cli: reduce-weights emits the plan sidecar") {
    Scratch tmp;
    CHECK(run("reduce-weights --epsilon 0.25 " + data + "/triangle_weighted.csp " +
              tmp("flat.csp")) == 0);
    const Instance g = parse_instance(read_file(tmp("flat.csp")));
    CHECK_FALSE(g.weighted);
    const auto plan = nlohmann::json::parse(read_file(tmp("flat.plan.json")));
    CHECK(plan.at("q_total").get<long long>() == 12); // ceil(3/0.25)
    CHECK(g.num_constraints() == 12);
}

TEST_CASE("cli: min-scale short-circuits bipartite instances") {
    Scratch tmp;
    CHECK(run("min-scale --delta 0.5 --alpha 1 " + data + "/bipartite_neq.csp " +
              tmp("scaled.csp")) == 0);
    const auto plan = nlohmann::json::parse(read_file(tmp("scaled.plan.json")));
    CHECK(plan.at("type") == "zero_certificate");
    const Instance f = parse_instance(read_file(data + "/bipartite_neq.csp"));
    CHECK(evaluate(f, parse_assignment(read_file(tmp("scaled.asn")))) == 0.0);
}

TEST_CASE("cli: regularize det and rand, then verify") {
    Scratch tmp;
    CHECK(run("regularize --det --epsilon 0.25 " + data + "/mixed_small.csp " + tmp("det.csp")) ==
          0);
    CHECK(fs::exists(tmp("det.map.json")));
    CHECK(fs::exists(tmp("det.cert.json")));
    CHECK(run("verify " + data + "/mixed_small.csp " + tmp("det.csp") + " --map " +
              tmp("det.map.json") + " --samples 50 --epsilon 0.25 --pass-rate 1.0") == 0);

    CHECK(run("regularize --rand --epsilon 0.5 --seed 4 --profile test " + data +
              "/path_or2.csp " + tmp("rand.csp")) == 0);
    CHECK(run("verify " + data + "/path_or2.csp " + tmp("rand.csp") + " --map " +
              tmp("rand.map.json") + " --cert " + tmp("rand.cert.json") +
              " --samples 50 --epsilon 0.5") == 0);
}

TEST_CASE("cli: pipelines write reports and assignments") {
    Scratch tmp;
    CHECK(run("pipeline max --delta 0.2 --solver brute --mode det --seed 1 --report " +
              tmp("max.json") + " --out " + tmp("max.asn") + " " + data +
              "/triangle_weighted.csp") == 0);
    const auto rep = nlohmann::json::parse(read_file(tmp("max.json")));
    CHECK(rep.at("goal") == "max");
    CHECK(rep.at("value").get<double>() >= 0.8 * rep.at("brute_opt").get<double>());

    CHECK(run("pipeline min --delta 0.5 --alpha 1 --solver brute --report " + tmp("min.json") +
              " " + data + "/bipartite_neq.csp") == 0);
    const auto min_rep = nlohmann::json::parse(read_file(tmp("min.json")));
    CHECK(min_rep.at("value").get<double>() == 0.0);
    CHECK(min_rep.at("zero_certificate").get<bool>());
}

TEST_CASE("cli: exit codes for budget exhaustion and bad input") {
    Scratch tmp;
    CHECK(run("generate --family random-maxcut -n 30 -m 40 --seed 1 " + tmp("big.csp")) == 0);
    CHECK(run("solve --method brute --goal max " + tmp("big.csp")) == 3);
    CHECK(run("solve --method brute --goal max /nonexistent.csp") == 1);
    CHECK(run("nonsense-subcommand") != 0);
}

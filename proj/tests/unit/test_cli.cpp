#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "halp/io.hpp"
#include "halp_cli/cli.hpp"

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "halp");
    std::ostringstream out, err;
    const int code = halp::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("halp-cli-" + name);
    std::filesystem::remove_all(p);
    return p.string();
}

}  // namespace

TEST_CASE("solve writes identical outputs on rerun") {
    const auto a = scratch("solve");
    const std::vector<std::string> args{"solve", "--benchmark", "ring4", "--oracle", "eps", "--eps", "0.25",
                                        "--seed", "7", "--trajectories", "10", "--out", a};
    const std::vector<std::string> files{"solution-7.json", "evaluation.csv", "manifest.json"};
    REQUIRE(run(args).code == halp::cli::kOk);
    std::vector<std::string> first;
    for (const auto& f : files) first.push_back(halp::read_file(a + "/" + f));
    REQUIRE(run(args).code == halp::cli::kOk);
    for (std::size_t i = 0; i < files.size(); ++i) {
        CAPTURE(files[i]);
        CHECK(halp::read_file(a + "/" + files[i]) == first[i]);
    }
    const auto csv = halp::read_file(a + "/evaluation.csv");
    CHECK(csv.rfind(std::string(halp::cli::kEvaluationHeader) + "\n", 0) == 0);

    const auto archive = halp::archive_from_json(halp::read_file(a + "/solution-7.json"));
    CHECK(archive.problem == "benchmark:ring4");
    CHECK(archive.status == "optimal");

    // the archive replays through evaluate
    const auto e = run({"evaluate", "--benchmark", "ring4", "--archive", a + "/solution-7.json", "--seed", "7",
                        "--trajectories", "10", "--out", scratch("eval")});
    CHECK(e.code == halp::cli::kOk);
    std::filesystem::remove_all(a);
}

TEST_CASE("bound and expect print the expected values") {
    const auto r = run({"bound", "--benchmark", "irrigation-ring6"});
    CHECK(r.code == 0);
    CHECK(r.out.find("49.1") != std::string::npos);

    const auto e = run({"expect", "--demo", "example5"});
    CHECK(e.code == 0);
    for (const auto* v : {"0.20", "0.22", "0.30"}) CHECK(e.out.find(v) != std::string::npos);

    const auto k = run({"expect", "--alpha", "2", "--beta", "3", "--kernel", "monomial:1,0"});
    CHECK(k.code == 0);
    CHECK(k.out.find("0.4") != std::string::npos);
}

TEST_CASE("benchmark files feed back into solve") {
    const auto dir = scratch("problem");
    const auto path = dir + "/ring3.json";
    REQUIRE(run({"benchmark", "--benchmark", "ring3", "--output", path}).code == 0);
    const auto r = run({"solve", "--problem", path, "--oracle", "mc", "--samples", "200", "--seed", "1",
                        "--trajectories", "5", "--horizon", "20", "--out", dir});
    CHECK(r.code == 0);
    CHECK(std::filesystem::exists(dir + "/solution-1.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("error categories map to exit codes") {
    auto r = run({"solve", "--benchmark", "torus9", "--seed", "1"});
    CHECK(r.code == halp::cli::kConfigError);
    CHECK(r.err.find("error[config]") != std::string::npos);

    CHECK(run({"solve", "--benchmark", "ring4"}).code == halp::cli::kConfigError);
    CHECK(run({"frobnicate"}).code == halp::cli::kConfigError);
    CHECK(run({"solve", "--benchmark", "ring4", "--problem", "x.json", "--seed", "1"}).code == halp::cli::kConfigError);
    CHECK(run({"expect", "--alpha", "0", "--beta", "1", "--kernel", "monomial:1,0"}).code == halp::cli::kNumericError);

    r = run({"baseline", "--benchmark", "ring4", "--method", "grid-vi", "--points", "30000", "--seed", "1",
             "--out", scratch("cap")});
    CHECK(r.code == halp::cli::kResourceError);
}

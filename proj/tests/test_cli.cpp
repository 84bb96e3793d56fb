#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qdefense/cli.hpp"

namespace fs = std::filesystem;
using qdefense::cli::run;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               fs::path("qdefense-test-" + std::to_string(::getpid()) + "-" +
                        std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }

private:
    static int& counter() {
        static int value = 0;
        return value;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream in(line);
    std::string field;
    while (std::getline(in, field, ',')) {
        fields.push_back(field);
    }
    return fields;
}

void write_config(const std::string& path, const nlohmann::json& doc) {
    std::ofstream out(path);
    out << doc.dump(2);
}

}  // namespace

TEST_CASE("qgrid emits the full 121-cell grid") {
    TempDir dir;
    const std::string out = dir.file("grid.csv");
    REQUIRE(run({"qgrid", "--out", out}) == 0);

    const auto lines = lines_of(slurp(out));
    REQUIRE(lines.size() == 122);
    CHECK(lines[0] == "p,q,q0,q1,v0,best_action");

    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_csv(lines[i]);
        REQUIRE(fields.size() == 6);
        const double q0 = std::stod(fields[2]);
        const double q1 = std::stod(fields[3]);
        const int best = std::stoi(fields[5]);
        CHECK(best == (q1 > q0 ? 1 : 0));  // argmax consistency per row
    }

    // p = q = 1 row: no reward reachable
    const auto last = split_csv(lines.back());
    CHECK(last[0] == "1");
    CHECK(last[1] == "1");
    CHECK(std::stod(last[2]) == 0.0);
    CHECK(std::stod(last[3]) == 0.0);
}

TEST_CASE("qgrid json format and q-learning mode") {
    TempDir dir;
    const std::string out = dir.file("grid.json");
    const std::string config = dir.file("config.json");
    write_config(config, {{"grid_step", 0.5}, {"episodes", 300}, {"seed", 5}});
    REQUIRE(run({"qgrid", "--config", config, "--format", "json", "--out", out}) == 0);

    const nlohmann::json doc = nlohmann::json::parse(slurp(out));
    REQUIRE(doc.is_array());
    CHECK(doc.size() == 9);
    for (const auto& row : doc) {
        CHECK(row.contains("v0"));
        const int best = row.at("best_action").get<int>();
        CHECK(best == (row.at("q1").get<double>() > row.at("q0").get<double>() ? 1 : 0));
    }
}

TEST_CASE("train writes a deterministic trace and theta pair") {
    TempDir dir;
    const std::string config = dir.file("config.json");
    write_config(config, {{"epochs", 250}, {"seed", 9}});

    const std::string out_a = dir.file("a.csv");
    const std::string out_b = dir.file("b.csv");
    REQUIRE(run({"train", "--config", config, "--out", out_a}) == 0);
    REQUIRE(run({"train", "--config", config, "--out", out_b}) == 0);

    CHECK(slurp(out_a) == slurp(out_b));
    CHECK(slurp(out_a + ".theta.json") == slurp(out_b + ".theta.json"));

    const auto lines = lines_of(slurp(out_a));
    REQUIRE(lines.size() == 251);
    CHECK(lines[0] == "epoch,state,action,reward,distance,v0,p_action0,p_action1");

    const nlohmann::json theta = nlohmann::json::parse(slurp(out_a + ".theta.json"));
    CHECK(theta.at("num_qubits").get<int>() == 1);
    CHECK(theta.at("angles").size() == 1);
}

TEST_CASE("train default run prefers take loop") {
    TempDir dir;
    const std::string out = dir.file("trace.csv");
    REQUIRE(run({"train", "--seed", "2", "--out", out,
                 "--theta-out", dir.file("theta.json")}) == 0);
    const auto lines = lines_of(slurp(out));
    REQUIRE(lines.size() == 2001);  // default 2000 epochs
    const auto last = split_csv(lines.back());
    CHECK(std::stod(last[6]) > std::stod(last[7]));  // P(take loop) > P(take bypass)
}

TEST_CASE("train epochs=0 emits a header-only trace") {
    TempDir dir;
    const std::string config = dir.file("config.json");
    write_config(config, {{"epochs", 0}});
    const std::string out = dir.file("empty.csv");
    REQUIRE(run({"train", "--config", config, "--out", out}) == 0);
    const auto lines = lines_of(slurp(out));
    REQUIRE(lines.size() == 1);
    CHECK(lines[0] == "epoch,state,action,reward,distance,v0,p_action0,p_action1");
}

TEST_CASE("simulate trace matches its config") {
    TempDir dir;
    const std::string out = dir.file("laps.csv");
    const std::string config = dir.file("config.json");
    write_config(config, {{"p", 0.5}, {"q", 0.5}, {"epochs", 10000}, {"tau", 1}});
    REQUIRE(run({"simulate", "--config", config, "--seed", "4", "--out", out}) == 0);

    const auto lines = lines_of(slurp(out));
    REQUIRE(lines.size() == 10001);
    CHECK(lines[0] == "epoch,distance,reward,violation");
    double mean = 0.0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_csv(lines[i]);
        REQUIRE(fields.size() == 4);
        const int distance = std::stoi(fields[1]);
        mean += distance;
        CHECK(fields[3] == ((distance <= 1) ? "1" : "0"));
    }
    mean /= 10000.0;
    CHECK(std::abs(mean - 3.0) <= 0.2);
}

TEST_CASE("attack-curve emits ordered scenario curves") {
    TempDir dir;
    const std::string out = dir.file("curve.csv");
    REQUIRE(run({"attack-curve", "--out", out}) == 0);

    const auto lines = lines_of(slurp(out));
    REQUIRE(lines.size() == 301);
    CHECK(lines[0] == "investment,probability,scenario");

    // rows come curve by curve: classical, balanced, quantum
    for (int i = 0; i < 100; ++i) {
        const auto classical = split_csv(lines[1 + i]);
        const auto balanced = split_csv(lines[101 + i]);
        const auto quantum = split_csv(lines[201 + i]);
        CHECK(classical[2] == "classical");
        CHECK(balanced[2] == "balanced");
        CHECK(quantum[2] == "quantum");
        CHECK(classical[0] == balanced[0]);
        CHECK(std::stod(quantum[1]) >= std::stod(balanced[1]));
        CHECK(std::stod(balanced[1]) >= std::stod(classical[1]));
    }
    CHECK(split_csv(lines[1])[1] == "0");  // zero investment never succeeds
}

TEST_CASE("velocity trace stops at the first violation") {
    TempDir dir;
    const std::string out = dir.file("gap.csv");
    REQUIRE(run({"velocity", "--out", out}) == 0);
    const auto lines = lines_of(slurp(out));
    CHECK(lines[0] == "time,velocity,gap");
    const auto last = split_csv(lines.back());
    CHECK(std::stod(last[2]) <= 1.0);
    // every earlier row is violation-free
    for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
        CHECK(std::stod(split_csv(lines[i])[2]) > 1.0);
    }

    // a drift-free attack keeps the gap constant through the horizon
    const std::string config = dir.file("config.json");
    write_config(config, {{"alpha_v", 0.0}, {"horizon", 2.0}, {"step", 0.5}});
    const std::string flat_out = dir.file("flat.csv");
    REQUIRE(run({"velocity", "--config", config, "--out", flat_out}) == 0);
    const auto flat = lines_of(slurp(flat_out));
    REQUIRE(flat.size() == 6);  // header + t = 0, 0.5, 1.0, 1.5, 2.0
    for (std::size_t i = 1; i < flat.size(); ++i) {
        CHECK(split_csv(flat[i])[2] == "5");
    }
}

TEST_CASE("unknown config fields are rejected without output") {
    TempDir dir;
    const std::string config = dir.file("config.json");
    write_config(config, {{"epochs", 5}, {"bananas", 1}});
    const std::string out = dir.file("never.csv");
    CHECK(run({"simulate", "--config", config, "--out", out}) != 0);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("validation failures exit nonzero and leave no partial files") {
    TempDir dir;

    SUBCASE("bad agent policy") {
        const std::string config = dir.file("config.json");
        write_config(config, {{"agent_policy", "zigzag"}});
        const std::string out = dir.file("x.csv");
        CHECK(run({"simulate", "--config", config, "--out", out}) != 0);
        CHECK_FALSE(fs::exists(out));
    }

    SUBCASE("grid step must divide 1") {
        const std::string config = dir.file("config.json");
        write_config(config, {{"grid_step", 0.3}});
        const std::string out = dir.file("x.csv");
        CHECK(run({"qgrid", "--config", config, "--out", out}) != 0);
        CHECK_FALSE(fs::exists(out));
    }

    SUBCASE("bad format flag") {
        CHECK(run({"simulate", "--format", "xml", "--out", dir.file("x.csv")}) != 0);
    }

    SUBCASE("velocity overflow removes the partial trace") {
        // negative drift keeps the gap open, so the exponential overflows
        // before any violation can stop the trace
        const std::string config = dir.file("config.json");
        write_config(config, {{"alpha_v", -0.1}, {"beta_v", 10.0}, {"horizon", 200.0}});
        const std::string out = dir.file("x.csv");
        CHECK(run({"velocity", "--config", config, "--out", out}) != 0);
        CHECK_FALSE(fs::exists(out));
    }

    SUBCASE("config file must exist") {
        CHECK(run({"qgrid", "--config", dir.file("missing.json"),
                   "--out", dir.file("x.csv")}) != 0);
    }
}

TEST_CASE("every subcommand is byte-identical across reruns") {
    TempDir dir;
    const std::vector<std::vector<std::string>> invocations = {
        {"qgrid", "--seed", "1"},
        {"train", "--seed", "1"},
        {"simulate", "--seed", "1"},
        {"attack-curve", "--seed", "1"},
        {"velocity", "--seed", "1"},
    };
    const std::string train_config = dir.file("train.json");
    write_config(train_config, {{"epochs", 150}});
    const std::string simulate_config = dir.file("simulate.json");
    write_config(simulate_config, {{"epochs", 2000}});

    for (std::vector<std::string> args : invocations) {
        if (args[0] == "train") {
            args.insert(args.end(), {"--config", train_config});
        }
        if (args[0] == "simulate") {
            args.insert(args.end(), {"--config", simulate_config});
        }
        const std::string out_a = dir.file(args[0] + "-a.csv");
        const std::string out_b = dir.file(args[0] + "-b.csv");
        std::vector<std::string> first = args;
        first.insert(first.end(), {"--out", out_a});
        std::vector<std::string> second = args;
        second.insert(second.end(), {"--out", out_b});
        REQUIRE(run(first) == 0);
        REQUIRE(run(second) == 0);
        CHECK(slurp(out_a) == slurp(out_b));
        if (args[0] == "train") {
            CHECK(slurp(out_a + ".theta.json") == slurp(out_b + ".theta.json"));
        }
    }
}

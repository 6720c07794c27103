#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "vrseq/checkpoint.hpp"
#include "vrseq/dataset.hpp"
#include "vrseq/evaluate.hpp"

using namespace vrseq;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(VRSEQ_BIN) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    std::string output;
    std::array<char, 4096> buf;
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) output.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), output};
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text) n += c == '\n' ? 1 : 0;
    return n;
}

struct Workdir {
    fs::path dir;
    Workdir() {
        dir = fs::temp_directory_path() / ("vrseq_cli_" + std::to_string(getpid()));
        fs::create_directories(dir);
    }
    ~Workdir() { fs::remove_all(dir); }
    std::string p(const char* name) const { return (dir / name).string(); }
};

const char* kTinyGen = " --identities 8 --dim 8 --len-min 4 --len-max 8 --seed 5 ";
const char* kTinyTrain =
    " --epochs 2 --patience 2 --batch 2 --feat-dim 4 --latent-dim 3 --mlp-hidden 4 "
    "--cell-dim 6 --proj-dim 3 --lstm-layers 1 --head-hidden 4 --seed 9 "
    "--train-fraction 0.75 ";

}  // namespace

TEST_CASE("gen-data is byte-reproducible and validates its flags") {
    Workdir w;
    auto r1 = run(std::string("gen-data") + kTinyGen + "--out " + w.p("a.vads"));
    CHECK(r1.exit_code == 0);
    CHECK(r1.output.find("identities: 8") != std::string::npos);
    auto r2 = run(std::string("gen-data") + kTinyGen + "--out " + w.p("b.vads"));
    CHECK(r2.exit_code == 0);
    CHECK(slurp(w.p("a.vads")) == slurp(w.p("b.vads")));

    // generated file loads through the library path
    const auto ds = load_dataset(w.p("a.vads"));
    CHECK(ds.num_identities() == 8);

    CHECK(run(std::string("gen-data") + kTinyGen).exit_code == 2);  // missing --out
    CHECK(run("gen-data --identities 8 --no-such-flag 1 --out x").exit_code == 2);
    CHECK(run("").exit_code == 2);
    CHECK(run("--help").exit_code == 0);
}

TEST_CASE("train writes a reproducible report and a loadable checkpoint") {
    Workdir w;
    REQUIRE(run(std::string("gen-data") + kTinyGen + "--out " + w.p("d.vads")).exit_code ==
            0);

    const std::string train_cmd = std::string("train --data ") + w.p("d.vads") + kTinyTrain;
    auto r1 = run(train_cmd + "--out " + w.p("m1.vack") + " --report " + w.p("r1.csv"));
    CHECK(r1.exit_code == 0);
    auto r2 = run(train_cmd + "--out " + w.p("m2.vack") + " --report " + w.p("r2.csv"));
    CHECK(r2.exit_code == 0);

    const std::string csv = slurp(w.p("r1.csv"));
    CHECK(csv == slurp(w.p("r2.csv")));
    CHECK(slurp(w.p("m1.vack")) == slurp(w.p("m2.vack")));
    CHECK(csv.rfind("epoch,L_V,L_y,L_d,L_C,L_R,E_train,E_val,kl_val\n", 0) == 0);
    CHECK(count_lines(csv) <= 1 + 2);  // header + at most `epochs` rows

    const auto ds = load_dataset(w.p("d.vads"));
    CHECK_NOTHROW(load_checkpoint(ds, w.p("m1.vack")));

    CHECK(run("train --data /nonexistent.vads --out x --report y").exit_code == 3);
}

TEST_CASE("eval emits metrics that match the library on the same checkpoint") {
    Workdir w;
    REQUIRE(run(std::string("gen-data") + kTinyGen + "--out " + w.p("d.vads")).exit_code ==
            0);
    REQUIRE(run(std::string("train --data ") + w.p("d.vads") + kTinyTrain + "--out " +
                w.p("m.vack") + " --report " + w.p("r.csv"))
                .exit_code == 0);

    auto r = run(std::string("eval --data ") + w.p("d.vads") + " --checkpoint " +
                 w.p("m.vack") + " --out-dir " + w.p("out"));
    CHECK(r.exit_code == 0);

    const auto ds = load_dataset(w.p("d.vads"));
    const auto model = load_model_for_eval(ds, w.p("m.vack"));
    const auto s = evaluate_model(*model, ds);

    const std::string metrics = slurp(w.p("out") + "/metrics.csv");
    std::ostringstream expect;
    expect << s.rank1 << ',';
    CHECK(metrics.find(expect.str()) != std::string::npos);

    const std::string curve = slurp(w.p("out") + "/cmc_curve.csv");
    CHECK(count_lines(curve) == 1 + ds.num_identities());

    // the cmc column is non-decreasing and reaches one
    double prev = 0.0, last = 0.0;
    std::istringstream lines(curve);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
        const auto comma = line.find(',');
        const double rate = std::stod(line.substr(comma + 1));
        CHECK(rate >= prev);
        prev = rate;
        last = rate;
    }
    CHECK(last == 1.0);
    CHECK(s.rank20 >= s.rank1);
}

TEST_CASE("length ablation emits the full grid") {
    Workdir w;
    REQUIRE(run(std::string("gen-data") + kTinyGen + "--out " + w.p("d.vads")).exit_code ==
            0);
    REQUIRE(run(std::string("train --data ") + w.p("d.vads") + kTinyTrain + "--out " +
                w.p("m.vack") + " --report " + w.p("r.csv"))
                .exit_code == 0);

    auto r = run(std::string("ablate --mode length --data ") + w.p("d.vads") +
                 " --checkpoint " + w.p("m.vack") + " --out " + w.p("grid.csv"));
    CHECK(r.exit_code == 0);
    const std::string grid = slurp(w.p("grid.csv"));
    CHECK(count_lines(grid) == 1 + 64);
    CHECK(grid.rfind("probe_len,gallery_len,eff_probe_len,eff_gallery_len,rank1\n", 0) == 0);

    // a grid cell agrees with an explicit truncated evaluation, and the
    // all-128 corner equals the untruncated run
    const auto ds = load_dataset(w.p("d.vads"));
    const auto model = load_model_for_eval(ds, w.p("m.vack"));
    const auto direct = evaluate_model(*model, ds, {}, 4, 8);
    const auto full = evaluate_model(*model, ds);
    std::istringstream lines(grid);
    std::string line;
    bool found = false, corner = false;
    while (std::getline(lines, line)) {
        const auto last_comma = line.rfind(',');
        if (line.rfind("4,8,", 0) == 0) {
            CHECK(std::stod(line.substr(last_comma + 1)) ==
                  doctest::Approx(direct.rank1).epsilon(1e-12));
            found = true;
        }
        if (line.rfind("128,128,", 0) == 0) {
            CHECK(std::stod(line.substr(last_comma + 1)) ==
                  doctest::Approx(full.rank1).epsilon(1e-12));
            corner = true;
        }
    }
    CHECK(found);
    CHECK(corner);

    CHECK(run(std::string("ablate --mode length --data ") + w.p("d.vads") + " --out " +
              w.p("x.csv"))
              .exit_code == 2);  // checkpoint required
}

TEST_CASE("fusion ablation reports both modes at matching checkpoints") {
    Workdir w;
    REQUIRE(run(std::string("gen-data") + kTinyGen + "--out " + w.p("d.vads")).exit_code ==
            0);
    auto r = run(std::string("ablate --mode fusion --data ") + w.p("d.vads") + kTinyTrain +
                 "--eval-epochs 1 2 --out " + w.p("fusion.csv"));
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(w.p("fusion.csv"));
    CHECK(csv.rfind("mode,epoch,rank1\n", 0) == 0);
    CHECK(csv.find("early,1,") != std::string::npos);
    CHECK(csv.find("early,2,") != std::string::npos);
    CHECK(csv.find("late,1,") != std::string::npos);
    CHECK(csv.find("late,2,") != std::string::npos);
}

TEST_CASE("lambda selection emits the nine-point table and names the winner") {
    Workdir w;
    REQUIRE(run(std::string("gen-data") + kTinyGen + "--out " + w.p("d.vads")).exit_code ==
            0);
    auto r = run(std::string("select-lambda --data ") + w.p("d.vads") + kTinyTrain +
                 "--out " + w.p("risk.csv"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("lambda* = ") != std::string::npos);
    const std::string csv = slurp(w.p("risk.csv"));
    CHECK(count_lines(csv) == 1 + 9);
    CHECK(csv.rfind("lambda,risk\n", 0) == 0);

    auto r2 = run(std::string("select-lambda --data ") + w.p("d.vads") + kTinyTrain +
                  "--out " + w.p("risk2.csv"));
    CHECK(r2.exit_code == 0);
    CHECK(csv == slurp(w.p("risk2.csv")));
}

TEST_CASE("grad-check passes clean and fails the negative control") {
    auto ok = run("grad-check");
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("PASS") != std::string::npos);
    CHECK(ok.output.find("max_rel_error") != std::string::npos);
    CHECK(ok.output.find("encoder:") != std::string::npos);  // per-group lines

    auto bad = run("grad-check --inject-sign-error");
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("FAIL") != std::string::npos);
}

TEST_CASE("config file values are used and unknown keys rejected") {
    Workdir w;
    {
        std::ofstream cfg(w.p("gen.cfg"));
        cfg << "identities=8\ndim=8\nlen-min=4\nlen-max=8\nseed=5\n";
    }
    auto r = run(std::string("gen-data --config ") + w.p("gen.cfg") + " --out " +
                 w.p("c.vads"));
    CHECK(r.exit_code == 0);
    REQUIRE(run(std::string("gen-data") + kTinyGen + "--out " + w.p("d.vads")).exit_code ==
            0);
    CHECK(slurp(w.p("c.vads")) == slurp(w.p("d.vads")));

    // flags take precedence over the config file
    auto r2 = run(std::string("gen-data --config ") + w.p("gen.cfg") +
                  " --identities 6 --out " + w.p("e.vads"));
    CHECK(r2.exit_code == 0);
    CHECK(load_dataset(w.p("e.vads")).num_identities() == 6);

    {
        std::ofstream cfg(w.p("bad.cfg"));
        cfg << "identities=8\nnot-a-key=1\n";
    }
    CHECK(run(std::string("gen-data --config ") + w.p("bad.cfg") + " --out " +
              w.p("f.vads"))
              .exit_code == 2);
}

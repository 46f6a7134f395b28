// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Thresholds and runtime budgets are pinned in code.

#include "nntf/nntf.hpp"
#include "oracles.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace nntf;
namespace fs = std::filesystem;

#ifndef NNTF_CLI_PATH
#define NNTF_CLI_PATH "nntf"
#endif

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(NNTF_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// --- criterion 1: composition identity ------------------------------------

Outcome composition_identity() {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(split_seed(seed, 401));
        TuckerModel tucker;
        const std::vector<std::size_t> shape = {5, 4, 3};
        const std::vector<std::size_t> mr = {3, 2, 2};
        for (std::size_t n = 0; n < 3; ++n)
            tucker.factors.push_back(oracle::random_matrix(shape[n], mr[n], rng));
        CPDModel core_cpd;
        core_cpd.weights.assign(4, 1.0);
        for (std::size_t n = 0; n < 3; ++n)
            core_cpd.factors.push_back(oracle::random_matrix(mr[n], 4, rng));
        canonicalize(core_cpd);
        tucker.core = cpd_reconstruct(core_cpd);

        const CPDModel composed = compose(tucker, core_cpd);
        worst = std::max(worst,
                         relative_error(tucker_reconstruct(tucker), cpd_reconstruct(composed)));
    }
    const double secs = seconds_since(start);
    Outcome out;
    out.pass = worst <= 1e-12 && secs < 1.0;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "worst error %.2e (<=1e-12), %.2f s (<1 s)", worst, secs);
    out.detail = buf;
    return out;
}

// --- criterion 2: rank-deficiency preservation -----------------------------

Outcome rank_deficiency_preservation() {
    const auto start = std::chrono::steady_clock::now();
    int rank_exact = 0, err_ok = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SynthSpec spec;
        spec.shape = {15, 15, 15};
        spec.multirank = {2, 2, 2};
        spec.cpd_rank = 3;
        spec.seed = seed;
        const GroundTruth truth = generate(spec);

        PipelineOptions opts;
        opts.seed = seed;
        opts.ntd.max_iters = 2000;
        const PipelineResult result = fit_rank_deficient(truth.clean, 3, opts);
        rank_exact += result.final_factor_ranks == std::vector<int>{2, 2, 2};
        err_ok += result.final_relative_error <= 1e-2;
    }
    const double secs = seconds_since(start);
    Outcome out;
    out.pass = rank_exact == 20 && err_ok >= 18 && secs < 60.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "rank==2 on %d/20 (need 20), error<=1e-2 on %d/20 (need >=18), %.1f s (<60 s)",
                  rank_exact, err_ok, secs);
    out.detail = buf;
    return out;
}

// --- criterion 3: multirank recovery ---------------------------------------

Outcome multirank_recovery() {
    const auto start = std::chrono::steady_clock::now();
    int clean_ok = 0, noisy_ok = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SynthSpec spec;
        spec.shape = {15, 15, 15};
        spec.multirank = {2, 2, 2};
        spec.cpd_rank = 3;
        spec.seed = seed;

        MultirankOptions opts;
        opts.epsilon = 1e-2;
        opts.nmf.seed = split_seed(seed, seed_stream::kMultirank);
        clean_ok += estimate_multirank(generate(spec).clean, opts).ranks ==
                    std::vector<int>{2, 2, 2};

        spec.snr_db = 40.0;
        MultirankOptions noisy = opts;
        noisy.epsilon = 5e-2;
        noisy_ok += estimate_multirank(generate(spec).noisy, noisy).ranks ==
                    std::vector<int>{2, 2, 2};
    }
    const double secs = seconds_since(start);
    Outcome out;
    out.pass = clean_ok >= 19 && noisy_ok >= 18 && secs < 120.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "noiseless %d/20 (need >=19), snr40 %d/20 (need >=18), %.1f s (<120 s)",
                  clean_ok, noisy_ok, secs);
    out.detail = buf;
    return out;
}

// --- criterion 4: monotone objective traces --------------------------------

Outcome monotone_traces() {
    int violations = 0;
    Rng shapes(4001);
    auto check_trace = [&](const std::vector<double>& trace) {
        for (std::size_t k = 1; k < trace.size(); ++k)
            if (trace[k] > trace[k - 1] + 1e-12)
                ++violations;
    };
    for (int instance = 0; instance < 50; ++instance) {
        const Matrix x =
            oracle::random_matrix(3 + shapes.next_u64() % 8, 3 + shapes.next_u64() % 8, shapes);
        NmfOptions opts;
        opts.rank = 1 + static_cast<int>(shapes.next_u64() % 4);
        opts.algorithm = NmfAlgorithm::MU;
        opts.max_iters = 60;
        opts.seed = shapes.next_u64();
        check_trace(nmf(x, opts).trace);
    }
    for (int instance = 0; instance < 50; ++instance) {
        const auto shape = oracle::random_shape(shapes, 3, 150);
        const DenseTensor t = oracle::random_tensor(shape, shapes);
        std::vector<int> mr(shape.size());
        for (std::size_t n = 0; n < shape.size(); ++n)
            mr[n] = 1 + static_cast<int>(shapes.next_u64() % std::min<std::size_t>(3, shape[n]));
        NtdOptions opts;
        opts.max_iters = 60;
        opts.seed = shapes.next_u64();
        check_trace(ntd(t, mr, opts).second.trace);
    }
    for (int instance = 0; instance < 50; ++instance) {
        const auto shape = oracle::random_shape(shapes, 3, 150);
        const DenseTensor t = oracle::random_tensor(shape, shapes);
        NcpdOptions opts;
        opts.algorithm = NmfAlgorithm::MU;
        opts.max_iters = 60;
        opts.seed = shapes.next_u64();
        check_trace(ncpd(t, 1 + static_cast<int>(shapes.next_u64() % 3), opts).second.trace);
    }
    Outcome out;
    out.pass = violations == 0;
    out.detail = std::to_string(violations) + " violations over 150 traces (slack 1e-12)";
    return out;
}

// --- criterion 5: oracle equivalence ---------------------------------------

Outcome oracle_equivalence() {
    Rng rng(4005);
    double worst = 0.0;
    int cases = 0;
    auto tensor_diff = [](const DenseTensor& a, const DenseTensor& b) {
        double w = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            w = std::max(w, std::abs(a[i] - b[i]));
        return w;
    };
    auto matrix_diff = [](const Matrix& a, const Matrix& b) {
        double w = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            w = std::max(w, std::abs(a.data()[i] - b.data()[i]));
        return w;
    };
    for (int trial = 0; trial < 200; ++trial) {
        const auto shape = oracle::random_shape(rng, 4, 256);
        const DenseTensor t = oracle::random_tensor(shape, rng);
        const std::size_t mode = rng.next_u64() % shape.size();

        const Matrix unfolded = unfold(t, mode);
        worst = std::max(worst, matrix_diff(unfolded, oracle::unfold(t, mode)));
        worst = std::max(worst, tensor_diff(fold(unfolded, mode, shape),
                                            oracle::fold(unfolded, mode, shape)));

        const Matrix m = oracle::random_matrix(1 + rng.next_u64() % 4, shape[mode], rng);
        worst = std::max(worst, tensor_diff(mode_n_product(t, m, mode),
                                            oracle::mode_n_product(t, m, mode)));

        const std::size_t rank = 1 + rng.next_u64() % 3;
        const Matrix a = oracle::random_matrix(1 + rng.next_u64() % 5, rank, rng);
        const Matrix b = oracle::random_matrix(1 + rng.next_u64() % 5, rank, rng);
        worst = std::max(worst, matrix_diff(khatri_rao(a, b), oracle::khatri_rao(a, b)));

        CPDModel cpd;
        cpd.weights.assign(rank, 0.0);
        for (double& w : cpd.weights)
            w = rng.uniform();
        for (std::size_t extent : shape)
            cpd.factors.push_back(oracle::random_matrix(extent, rank, rng));
        worst = std::max(worst, tensor_diff(cpd_reconstruct(cpd), oracle::cpd_reconstruct(cpd)));

        TuckerModel tucker;
        std::vector<std::size_t> core_shape;
        for (std::size_t extent : shape) {
            core_shape.push_back(1 + rng.next_u64() % 3);
            tucker.factors.push_back(oracle::random_matrix(extent, core_shape.back(), rng));
        }
        tucker.core = oracle::random_tensor(core_shape, rng);
        worst = std::max(worst,
                         tensor_diff(tucker_reconstruct(tucker), oracle::tucker_reconstruct(tucker)));
        ++cases;
    }
    Outcome out;
    out.pass = worst <= 1e-12 && cases >= 200;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d cases, worst elementwise gap %.2e (<=1e-12)", cases,
                  worst);
    out.detail = buf;
    return out;
}

// --- criterion 6: nonnegativity fuzz ---------------------------------------

Outcome nonnegativity_fuzz() {
    Rng rng(4007);
    int runs = 0, violations = 0;
    auto check_matrix = [&](const Matrix& m) {
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m.data()[i] < 0.0)
                ++violations;
    };
    for (int instance = 0; instance < 40; ++instance) {
        const Matrix x =
            oracle::random_matrix(2 + rng.next_u64() % 9, 2 + rng.next_u64() % 9, rng);
        NmfOptions opts;
        opts.rank = 1 + static_cast<int>(rng.next_u64() % 5);
        opts.algorithm = (instance % 2) ? NmfAlgorithm::MU : NmfAlgorithm::HALS;
        opts.max_iters = 40;
        opts.seed = rng.next_u64();
        const NmfResult r = nmf(x, opts);
        check_matrix(r.w);
        check_matrix(r.h);
        ++runs;
    }
    for (int instance = 0; instance < 30; ++instance) {
        const auto shape = oracle::random_shape(rng, 3, 120);
        const DenseTensor t = oracle::random_tensor(shape, rng);
        std::vector<int> mr(shape.size());
        for (std::size_t n = 0; n < shape.size(); ++n)
            mr[n] = 1 + static_cast<int>(rng.next_u64() % 3);
        NtdOptions opts;
        opts.max_iters = 40;
        opts.seed = rng.next_u64();
        const auto [model, report] = ntd(t, mr, opts);
        for (const Matrix& f : model.factors)
            check_matrix(f);
        for (std::size_t i = 0; i < model.core.size(); ++i)
            if (model.core[i] < 0.0)
                ++violations;
        ++runs;
    }
    for (int instance = 0; instance < 30; ++instance) {
        const auto shape = oracle::random_shape(rng, 3, 120);
        const DenseTensor t = oracle::random_tensor(shape, rng);
        NcpdOptions opts;
        opts.algorithm = (instance % 2) ? NmfAlgorithm::MU : NmfAlgorithm::HALS;
        opts.max_iters = 40;
        opts.seed = rng.next_u64();
        const auto [model, report] = ncpd(t, 1 + static_cast<int>(rng.next_u64() % 4), opts);
        for (const Matrix& f : model.factors)
            check_matrix(f);
        for (double w : model.weights)
            if (w < 0.0)
                ++violations;
        ++runs;
    }
    Outcome out;
    out.pass = violations == 0 && runs >= 100;
    out.detail = std::to_string(runs) + " fits, " + std::to_string(violations) +
                 " negative entries";
    return out;
}

// --- criterion 7: CLI determinism ------------------------------------------

// Wall-clock fields are measurements, not computed results; they are zeroed
// before the byte comparison. Everything else must match exactly.
std::string normalized(const fs::path& file) {
    std::string content = slurp(file);
    if (file.extension() == ".json") {
        auto j = nlohmann::json::parse(content);
        std::function<void(nlohmann::json&)> scrub = [&](nlohmann::json& node) {
            if (node.is_object()) {
                for (auto& [key, value] : node.items()) {
                    if (key == "wall_time_s" || key == "seconds")
                        value = 0.0;
                    else
                        scrub(value);
                }
            }
        };
        scrub(j);
        return j.dump();
    }
    if (file.filename().string().rfind("comparison", 0) == 0) {
        // Drop the trailing wall-time column of each row.
        std::istringstream in(content);
        std::string line, result;
        while (std::getline(in, line)) {
            const std::size_t cut = line.rfind(',');
            result += line.substr(0, cut);
            result += '\n';
        }
        return result;
    }
    return content;
}

Outcome cli_determinism() {
    const fs::path base = fs::temp_directory_path() / "nntf_acceptance" / "determinism";
    fs::remove_all(base);
    fs::create_directories(base);

    const std::string synth_small =
        "synth --shape 6,5,4 --multirank 2,2,2 --rank 3 --seed 11 --threads 1 --output-dir ";
    const std::string synth_noisy = "synth --shape 8,7,6 --multirank 2,2,1 --rank 3 --snr-db 25 "
                                    "--seed 5 --threads 1 --output-dir ";
    const std::string synth_rank1 =
        "synth --shape 5,4,3 --multirank 1,1,1 --rank 1 --seed 2 --threads 1 --output-dir ";

    std::vector<std::pair<std::string, std::string>> fixtures;
    fixtures.emplace_back("synth_small", synth_small);
    fixtures.emplace_back("synth_noisy", synth_noisy);
    fixtures.emplace_back("synth_rank1", synth_rank1);

    // Input tensors for the dependent commands.
    const fs::path inputs = base / "inputs";
    if (run_cli(synth_small + (inputs / "a").string()) != 0 ||
        run_cli(synth_noisy + (inputs / "b").string()) != 0 ||
        run_cli(synth_rank1 + (inputs / "c").string()) != 0)
        return {false, "fixture synthesis failed"};
    const std::string in_a = (inputs / "a" / "tensor.tnsr").string();
    const std::string in_b = (inputs / "b" / "tensor.tnsr").string();
    const std::string in_c = (inputs / "c" / "tensor.tnsr").string();

    fixtures.emplace_back("multirank_a",
                          "multirank --input " + in_a + " --seed 3 --threads 1 --output-dir ");
    fixtures.emplace_back("multirank_c", "multirank --input " + in_c +
                                             " --epsilon 0.02 --seed 4 --threads 1 --output-dir ");
    fixtures.emplace_back("fit_direct_a", "fit --input " + in_a +
                                              " --method direct --rank 3 --max-iters 150 --seed 7 "
                                              "--threads 1 --output-dir ");
    fixtures.emplace_back("fit_direct_c", "fit --input " + in_c +
                                              " --method direct --rank 1 --seed 8 --threads 1 "
                                              "--output-dir ");
    fixtures.emplace_back("fit_two_stage_a",
                          "fit --input " + in_a +
                              " --method two-stage --rank 3 --max-iters 300 --seed 9 --threads 1 "
                              "--output-dir ");
    fixtures.emplace_back("fit_two_stage_b",
                          "fit --input " + in_b +
                              " --method two-stage --rank 3 --multirank 2,2,1 --max-iters 300 "
                              "--seed 10 --threads 1 --output-dir ");
    fixtures.emplace_back("compare_small",
                          "compare --shape 6,5,4 --multirank 2,2,2 --rank 3 --snr-db 20 "
                          "--num-seeds 2 --known-multirank --restarts 2 --max-iters 150 --seed 12 "
                          "--threads 1 --output-dir ");

    int mismatches = 0;
    int checked = 0;
    for (const auto& [name, command] : fixtures) {
        const fs::path dir1 = base / (name + "_run1");
        const fs::path dir2 = base / (name + "_run2");
        const int c1 = run_cli(command + dir1.string());
        const int c2 = run_cli(command + dir2.string());
        if (c1 != c2) {
            ++mismatches;
            continue;
        }
        for (const auto& entry : fs::directory_iterator(dir1)) {
            const fs::path other = dir2 / entry.path().filename();
            ++checked;
            if (!fs::exists(other) || normalized(entry.path()) != normalized(other))
                ++mismatches;
        }
    }
    Outcome out;
    out.pass = mismatches == 0 && fixtures.size() == 10;
    out.detail = std::to_string(fixtures.size()) + " command fixtures, " +
                 std::to_string(checked) + " files compared, " + std::to_string(mismatches) +
                 " mismatches";
    return out;
}

// --- criterion 8: baseline contrast ----------------------------------------

Outcome baseline_contrast() {
    const fs::path dir = fs::temp_directory_path() / "nntf_acceptance" / "contrast";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const int code = run_cli(
        "compare --shape 15,15,15 --multirank 2,2,2 --rank 3 --snr-db 20 --num-seeds 20 "
        "--known-multirank --seed 42 --threads 1 --output-dir " +
        dir.string());
    if (code != 0)
        return {false, "compare command failed"};

    // Recompute the excess-rank fractions from the per-seed rows and check
    // them against the emitted summary.
    std::istringstream csv(slurp(dir / "comparison.csv"));
    std::string line;
    std::getline(csv, line);
    if (line != "seed,method,error,fms,rank_mode0,rank_mode1,rank_mode2,wall_time_s")
        return {false, "unexpected comparison.csv header: " + line};
    int rows = 0, direct_excess = 0, two_stage_excess = 0;
    while (std::getline(csv, line)) {
        std::istringstream fields(line);
        std::string seed, method, error, fms, r0, r1, r2;
        std::getline(fields, seed, ',');
        std::getline(fields, method, ',');
        std::getline(fields, error, ',');
        std::getline(fields, fms, ',');
        std::getline(fields, r0, ',');
        std::getline(fields, r1, ',');
        std::getline(fields, r2, ',');
        const bool excess = std::stoi(r0) > 2 || std::stoi(r1) > 2 || std::stoi(r2) > 2;
        if (method == "direct")
            direct_excess += excess;
        else if (method == "two-stage")
            two_stage_excess += excess;
        else
            return {false, "unexpected method column: " + method};
        ++rows;
    }
    if (rows != 40)
        return {false, "expected 40 rows, got " + std::to_string(rows)};

    const std::string summary = slurp(dir / "comparison_summary.csv");
    std::ostringstream direct_frac, two_stage_frac;
    direct_frac << "direct,20,";
    two_stage_frac << "two-stage,20,";
    const bool has_rows = summary.find("direct,20,") != std::string::npos &&
                          summary.find("two-stage,20,") != std::string::npos;
    auto summary_fraction = [&](const std::string& method) -> double {
        std::istringstream in(summary);
        std::string row;
        std::getline(in, row); // header
        while (std::getline(in, row)) {
            if (row.rfind(method + ",", 0) != 0)
                continue;
            std::istringstream fields(row);
            std::string tok;
            for (int i = 0; i < 5; ++i)
                std::getline(fields, tok, ',');
            return std::stod(tok);
        }
        return -1.0;
    };
    const double emitted_direct = summary_fraction("direct");
    const double emitted_two_stage = summary_fraction("two-stage");
    const bool consistent = has_rows &&
                            std::abs(emitted_direct - direct_excess / 20.0) <= 1e-12 &&
                            std::abs(emitted_two_stage - two_stage_excess / 20.0) <= 1e-12;
    Outcome out;
    out.pass = consistent;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "excess-rank fraction: direct %.2f, two-stage %.2f (emitted %.2f / %.2f, "
                  "consistent: %s)",
                  direct_excess / 20.0, two_stage_excess / 20.0, emitted_direct,
                  emitted_two_stage, consistent ? "yes" : "no");
    out.detail = buf;
    return out;
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"1. composition identity", composition_identity},
        {"2. rank-deficiency preservation", rank_deficiency_preservation},
        {"3. multirank recovery", multirank_recovery},
        {"4. monotone objective traces", monotone_traces},
        {"5. oracle equivalence", oracle_equivalence},
        {"6. nonnegativity fuzz", nonnegativity_fuzz},
        {"7. CLI determinism", cli_determinism},
        {"8. baseline contrast", baseline_contrast},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        const Outcome outcome = criterion.run();
        std::printf("[%s] %s: %s\n", outcome.pass ? "PASS" : "FAIL", criterion.name,
                    outcome.detail.c_str());
        std::fflush(stdout);
        failures += outcome.pass ? 0 : 1;
    }
    if (failures)
        std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    else
        std::printf("all %zu criteria passed\n", criteria.size());
    return failures == 0 ? 0 : 1;
}

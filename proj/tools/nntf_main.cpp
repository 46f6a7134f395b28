// nntf command-line tool: synthetic fixtures, multirank estimation, CPD
// fitting (direct or two-stage), and the method comparison harness.

#include "nntf/nntf.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;        // IO or validation failure
constexpr int kExitNotConverged = 2; // numerical non-convergence

struct CommonArgs {
    std::string output_dir = ".";
    std::uint64_t seed = 0;
    int threads = 1;
    int restarts = 5;
    int max_iters = 500;
    double tol = 1e-8;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--output-dir", args.output_dir, "Directory for output files");
    cmd->add_option("--seed", args.seed, "Base seed; all stage/restart seeds derive from it");
    cmd->add_option("--threads", args.threads, "Worker threads for independent restarts")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--restarts", args.restarts, "Restarts per NMF rank probe and per fit stage")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", args.max_iters, "Iteration cap for the inner solvers")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tol", args.tol, "Relative objective-change stopping tolerance");
}

fs::path prepare_output_dir(const std::string& dir) {
    fs::path path(dir);
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec)
        throw nntf::io_error("cannot create output directory '" + dir + "': " + ec.message());
    return path;
}

std::vector<std::size_t> to_shape(const std::vector<int>& values) {
    std::vector<std::size_t> shape;
    shape.reserve(values.size());
    for (int v : values) {
        if (v < 1)
            throw std::invalid_argument("shape entries must be positive");
        shape.push_back(static_cast<std::size_t>(v));
    }
    return shape;
}

// Broadcast a single value over N modes; otherwise require one per mode.
std::vector<int> per_mode(std::vector<int> values, std::size_t order, const char* flag) {
    if (values.size() == 1)
        return std::vector<int>(order, values[0]);
    if (values.size() != order)
        throw std::invalid_argument(std::string(flag) + " needs 1 or " + std::to_string(order) +
                                    " comma-separated values");
    return values;
}

json report_from(const nntf::FitReport& report) {
    json j;
    j["relative_error"] = report.final_relative_error;
    j["iterations"] = report.iterations;
    j["converged"] = report.converged;
    j["wall_time_s"] = report.wall_time_s;
    j["flags"] = report.flags;
    return j;
}

std::string trace_csv_rows(const std::string& stage, const std::vector<double>& trace) {
    std::ostringstream out;
    for (std::size_t i = 0; i < trace.size(); ++i)
        out << stage << ',' << i + 1 << ',' << nntf::format_double(trace[i]) << '\n';
    return out.str();
}

void write_factor_csvs(const fs::path& dir, const std::string& prefix,
                       const nntf::CPDModel& model) {
    for (std::size_t n = 0; n < model.order(); ++n)
        nntf::write_matrix_csv((dir / (prefix + std::to_string(n) + ".csv")).string(),
                               model.factors[n]);
}

void require_flag(bool provided, const char* flag) {
    if (!provided)
        throw std::invalid_argument(std::string(flag) + " is required");
}

int run_synth(const CommonArgs& common, const std::vector<int>& shape,
              const std::vector<int>& multirank, int rank, double snr_db, bool has_snr) {
    require_flag(!shape.empty(), "--shape");
    require_flag(!multirank.empty(), "--multirank");
    require_flag(rank >= 1, "--rank");
    nntf::SynthSpec spec;
    spec.shape = to_shape(shape);
    spec.multirank = per_mode(multirank, spec.shape.size(), "--multirank");
    spec.cpd_rank = rank;
    if (has_snr)
        spec.snr_db = snr_db;
    spec.seed = common.seed;

    const nntf::GroundTruth truth = nntf::generate(spec);
    const fs::path dir = prepare_output_dir(common.output_dir);
    nntf::write_tensor_file((dir / "tensor.tnsr").string(), truth.noisy);
    write_factor_csvs(dir, "truth_mode", truth.model);

    json meta;
    meta["shape"] = shape;
    meta["multirank"] = spec.multirank;
    meta["cpd_rank"] = rank;
    meta["seed"] = spec.seed;
    meta["rank_deficient"] = spec.rank_deficient();
    meta["weights"] = truth.model.weights;
    if (has_snr) {
        meta["snr_db_requested"] = snr_db;
        meta["snr_db_realized"] = *truth.realized_snr_db;
    }
    std::vector<int> truth_ranks;
    for (const nntf::Matrix& f : truth.model.factors)
        truth_ranks.push_back(nntf::numerical_rank(f));
    meta["factor_numerical_ranks"] = truth_ranks;
    nntf::write_text_file((dir / "meta.json").string(), meta.dump(2) + "\n");

    std::cout << "wrote " << (dir / "tensor.tnsr").string() << " ("
              << truth.noisy.size() << " entries)\n";
    return kExitOk;
}

int run_multirank(const CommonArgs& common, const std::string& input, double epsilon,
                  const std::vector<int>& r_max) {
    require_flag(!input.empty(), "--input");
    const nntf::DenseTensor t = nntf::read_tensor_file(input);

    nntf::MultirankOptions opts;
    opts.epsilon = epsilon;
    if (!r_max.empty())
        opts.r_max_per_mode = per_mode(r_max, t.order(), "--r-max");
    opts.restarts = common.restarts;
    opts.threads = common.threads;
    opts.nmf.max_iters = common.max_iters;
    opts.nmf.tol = common.tol;
    opts.nmf.seed = common.seed;

    const nntf::MultirankEstimate est = nntf::estimate_multirank(t, opts);

    const fs::path dir = prepare_output_dir(common.output_dir);
    std::ostringstream csv;
    csv << "mode,rank,error,selected\n";
    for (std::size_t n = 0; n < est.curves.size(); ++n)
        for (const nntf::RankError& point : est.curves[n])
            csv << n << ',' << point.rank << ',' << nntf::format_double(point.error) << ','
                << (est.mode_converged[n] && point.rank == est.ranks[n] ? 1 : 0) << '\n';
    nntf::write_text_file((dir / "multirank.csv").string(), csv.str());

    std::cout << "multirank:";
    for (std::size_t n = 0; n < est.ranks.size(); ++n)
        std::cout << ' ' << est.ranks[n] << (est.mode_converged[n] ? "" : "(not converged)");
    std::cout << '\n';
    return est.all_converged() ? kExitOk : kExitNotConverged;
}

int run_fit(const CommonArgs& common, const std::string& input, const std::string& method,
            int rank, double epsilon, const std::vector<int>& r_max,
            const std::vector<int>& multirank_override, bool force_multirank) {
    require_flag(!input.empty(), "--input");
    require_flag(rank >= 1, "--rank");
    const nntf::DenseTensor t = nntf::read_tensor_file(input);
    const fs::path dir = prepare_output_dir(common.output_dir);

    json report;
    report["method"] = method;
    report["rank"] = rank;
    std::string trace = "stage,iteration,objective\n";
    bool usable = true;

    if (method == "direct") {
        nntf::NcpdOptions opts;
        opts.max_iters = common.max_iters;
        opts.tol = common.tol;
        const nntf::BaselineResult baseline = nntf::direct_baseline_best_of(
            t, rank, opts, common.restarts, common.threads,
            nntf::split_seed(common.seed, nntf::seed_stream::kBaseline));
        write_factor_csvs(dir, "factors_mode", baseline.model);
        trace += trace_csv_rows("ncpd", baseline.report.trace);
        report["final_relative_error"] = baseline.report.final_relative_error;
        report["factor_ranks"] = baseline.factor_ranks;
        report["weights"] = baseline.model.weights;
        report["iterations"] = baseline.report.iterations;
        report["wall_time_s"] = baseline.report.wall_time_s;
        report["converged"] = baseline.report.converged;
        std::cout << "direct ncpd error " << baseline.report.final_relative_error << '\n';
    } else if (method == "two-stage") {
        nntf::PipelineOptions opts;
        opts.multirank.epsilon = epsilon;
        if (!r_max.empty())
            opts.multirank.r_max_per_mode = per_mode(r_max, t.order(), "--r-max");
        opts.multirank.restarts = common.restarts;
        opts.multirank.nmf.max_iters = common.max_iters;
        opts.multirank.nmf.tol = common.tol;
        if (!multirank_override.empty())
            opts.multirank_override = per_mode(multirank_override, t.order(), "--multirank");
        opts.force_multirank = force_multirank;
        opts.ntd.max_iters = common.max_iters;
        opts.ntd.tol = common.tol;
        opts.core_cpd.max_iters = common.max_iters;
        opts.core_cpd.tol = common.tol;
        opts.stage_restarts = common.restarts;
        opts.threads = common.threads;
        opts.seed = common.seed;

        const nntf::PipelineResult result = nntf::fit_rank_deficient(t, rank, opts);
        write_factor_csvs(dir, "factors_mode", result.final);
        trace += trace_csv_rows("ntd", result.reports.ntd.trace);
        trace += trace_csv_rows("core_cpd", result.reports.core_cpd.trace);
        report["final_relative_error"] = result.final_relative_error;
        report["factor_ranks"] = result.final_factor_ranks;
        report["weights"] = result.final.weights;
        report["iterations"] =
            result.reports.ntd.iterations + result.reports.core_cpd.iterations;
        report["wall_time_s"] = result.wall_time_s;
        json stages;
        stages["multirank"]["ranks"] = result.multirank.ranks;
        stages["multirank"]["epsilon"] = result.multirank.epsilon;
        stages["multirank"]["converged"] = result.multirank.all_converged();
        stages["multirank"]["seconds"] = result.reports.multirank_seconds;
        stages["ntd"] = report_from(result.reports.ntd);
        stages["core_cpd"] = report_from(result.reports.core_cpd);
        report["stages"] = stages;
        report["converged"] =
            result.reports.ntd.converged && result.reports.core_cpd.converged;
        usable = result.multirank.all_converged();
        std::cout << "two-stage error " << result.final_relative_error << ", multirank";
        for (int r : result.multirank.ranks)
            std::cout << ' ' << r;
        std::cout << '\n';
    } else {
        throw std::invalid_argument("--method must be 'direct' or 'two-stage'");
    }

    nntf::write_text_file((dir / "report.json").string(), report.dump(2) + "\n");
    nntf::write_text_file((dir / "trace.csv").string(), trace);
    return usable ? kExitOk : kExitNotConverged;
}

int run_compare(const CommonArgs& common, const std::vector<int>& shape,
                const std::vector<int>& multirank, int rank, double snr_db, bool has_snr,
                int num_seeds, double epsilon, bool known_multirank, bool force_multirank) {
    require_flag(!shape.empty(), "--shape");
    require_flag(!multirank.empty(), "--multirank");
    require_flag(rank >= 1, "--rank");
    const std::vector<std::size_t> tshape = to_shape(shape);
    const std::vector<int> true_multirank = per_mode(multirank, tshape.size(), "--multirank");
    const std::size_t order = tshape.size();

    const fs::path dir = prepare_output_dir(common.output_dir);
    std::ostringstream csv;
    csv << "seed,method,error,fms";
    for (std::size_t n = 0; n < order; ++n)
        csv << ",rank_mode" << n;
    csv << ",wall_time_s\n";

    // A factor is counted rank-excessive when its numerical rank exceeds the
    // planted bound min(R_n, R) in any mode.
    auto excess = [&](const std::vector<int>& ranks) {
        for (std::size_t n = 0; n < order; ++n)
            if (ranks[n] > std::min(true_multirank[n], rank))
                return true;
        return false;
    };
    auto emit = [&](std::uint64_t seed, const char* method, const nntf::MethodSummary& s) {
        csv << seed << ',' << method << ',' << nntf::format_double(s.error) << ','
            << (s.fms ? nntf::format_double(*s.fms) : std::string());
        for (std::size_t n = 0; n < order; ++n)
            csv << ',' << s.factor_ranks[n];
        csv << ',' << nntf::format_double(s.wall_time_s) << '\n';
    };

    struct Tally {
        double error_sum = 0.0, fms_sum = 0.0, time_sum = 0.0;
        int excess_count = 0;
    };
    Tally two_stage, direct;

    for (int i = 0; i < num_seeds; ++i) {
        const std::uint64_t instance_seed = nntf::split_seed(common.seed, static_cast<std::uint64_t>(i));
        nntf::SynthSpec spec;
        spec.shape = tshape;
        spec.multirank = true_multirank;
        spec.cpd_rank = rank;
        if (has_snr)
            spec.snr_db = snr_db;
        spec.seed = instance_seed;
        const nntf::GroundTruth truth = nntf::generate(spec);

        nntf::PipelineOptions opts;
        opts.multirank.epsilon = epsilon;
        opts.multirank.restarts = common.restarts;
        opts.multirank.nmf.max_iters = common.max_iters;
        opts.multirank.nmf.tol = common.tol;
        if (known_multirank)
            opts.multirank_override = true_multirank;
        opts.force_multirank = force_multirank;
        opts.ntd.max_iters = common.max_iters;
        opts.ntd.tol = common.tol;
        opts.core_cpd.max_iters = common.max_iters;
        opts.core_cpd.tol = common.tol;
        opts.stage_restarts = common.restarts;
        opts.threads = common.threads;
        opts.seed = instance_seed;

        const nntf::ComparisonReport report =
            nntf::compare(truth.noisy, rank, opts, &truth.model);
        emit(instance_seed, "two-stage", report.two_stage);
        emit(instance_seed, "direct", report.direct);

        two_stage.error_sum += report.two_stage.error;
        two_stage.fms_sum += report.two_stage.fms.value_or(0.0);
        two_stage.time_sum += report.two_stage.wall_time_s;
        two_stage.excess_count += excess(report.two_stage.factor_ranks) ? 1 : 0;
        direct.error_sum += report.direct.error;
        direct.fms_sum += report.direct.fms.value_or(0.0);
        direct.time_sum += report.direct.wall_time_s;
        direct.excess_count += excess(report.direct.factor_ranks) ? 1 : 0;
    }

    nntf::write_text_file((dir / "comparison.csv").string(), csv.str());

    const double denom = static_cast<double>(num_seeds);
    std::ostringstream summary;
    summary << "method,seeds,mean_error,mean_fms,excess_rank_fraction,mean_wall_time_s\n";
    auto summarize = [&](const char* method, const Tally& t) {
        summary << method << ',' << num_seeds << ',' << nntf::format_double(t.error_sum / denom)
                << ',' << nntf::format_double(t.fms_sum / denom) << ','
                << nntf::format_double(t.excess_count / denom) << ','
                << nntf::format_double(t.time_sum / denom) << '\n';
    };
    summarize("two-stage", two_stage);
    summarize("direct", direct);
    nntf::write_text_file((dir / "comparison_summary.csv").string(), summary.str());

    std::cout << "excess-rank fraction: two-stage " << (two_stage.excess_count / denom)
              << ", direct " << (direct.excess_count / denom) << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonnegative tensor factorization with deliberately rank-deficient factors"};
    app.require_subcommand(1);
    // Config files hold key=value lines under a [subcommand] section; an
    // unrecognized key is an error, never a silent typo.
    app.set_config("--config", "", "Read options from a config file (use a [subcommand] section)");
    app.allow_config_extras(CLI::config_extras_mode::error);

    CommonArgs synth_common, mr_common, fit_common, cmp_common;

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic tensor with known factors");
    std::vector<int> synth_shape, synth_multirank;
    int synth_rank = 0;
    double synth_snr = 0.0;
    add_common(synth, synth_common);
    synth->add_option("--shape", synth_shape, "Mode sizes, e.g. 15,15,15")->delimiter(',');
    synth->add_option("--multirank", synth_multirank, "Planted per-mode ranks R_n")
        ->delimiter(',');
    synth->add_option("--rank", synth_rank, "Planted CPD rank R");
    auto* synth_snr_opt = synth->add_option("--snr-db", synth_snr,
                                            "Multiplicative noise level; omit for noiseless");

    // multirank
    auto* mr = app.add_subcommand("multirank", "Estimate the nonnegative multirank of a tensor");
    std::string mr_input;
    double mr_epsilon = 1e-2;
    std::vector<int> mr_rmax;
    add_common(mr, mr_common);
    mr->add_option("--input", mr_input, "Tensor file (TNSR format)");
    mr->add_option("--epsilon", mr_epsilon, "Cone-membership error threshold");
    mr->add_option("--r-max", mr_rmax, "Per-mode sweep ceiling (default: automatic)")
        ->delimiter(',');

    // fit
    auto* fit = app.add_subcommand("fit", "Fit CPD factors (direct NCPD or two-stage)");
    std::string fit_input, fit_method = "two-stage";
    int fit_rank = 0;
    double fit_epsilon = 1e-2;
    std::vector<int> fit_rmax, fit_multirank;
    bool fit_force = false;
    add_common(fit, fit_common);
    fit->add_option("--input", fit_input, "Tensor file (TNSR format)");
    fit->add_option("--rank", fit_rank, "CPD rank R");
    fit->add_option("--method", fit_method, "direct | two-stage")
        ->check(CLI::IsMember({"direct", "two-stage"}));
    fit->add_option("--epsilon", fit_epsilon, "Multirank acceptance threshold (two-stage)");
    fit->add_option("--r-max", fit_rmax, "Multirank sweep ceiling (two-stage)")->delimiter(',');
    fit->add_option("--multirank", fit_multirank,
                    "Skip estimation and fit at this multirank (two-stage)")
        ->delimiter(',');
    fit->add_flag("--force-multirank", fit_force,
                  "Proceed with r_max ranks on modes that never met epsilon");

    // compare
    auto* cmp = app.add_subcommand("compare",
                                   "Per-seed comparison of two-stage vs direct on synthetic data");
    std::vector<int> cmp_shape, cmp_multirank;
    int cmp_rank = 0, cmp_seeds = 20;
    double cmp_snr = 0.0, cmp_epsilon = 1e-2;
    bool cmp_known = false, cmp_force = false;
    add_common(cmp, cmp_common);
    cmp->add_option("--shape", cmp_shape, "Mode sizes")->delimiter(',');
    cmp->add_option("--multirank", cmp_multirank, "Planted per-mode ranks")->delimiter(',');
    cmp->add_option("--rank", cmp_rank, "CPD rank R");
    auto* cmp_snr_opt = cmp->add_option("--snr-db", cmp_snr, "Noise level; omit for noiseless");
    cmp->add_option("--num-seeds", cmp_seeds, "Number of synthetic instances")
        ->check(CLI::PositiveNumber);
    cmp->add_option("--epsilon", cmp_epsilon, "Multirank acceptance threshold");
    cmp->add_flag("--known-multirank", cmp_known,
                  "Give the two-stage method the planted multirank instead of estimating");
    cmp->add_flag("--force-multirank", cmp_force,
                  "Proceed with r_max ranks on modes that never met epsilon");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }

    try {
        if (synth->parsed())
            return run_synth(synth_common, synth_shape, synth_multirank, synth_rank, synth_snr,
                             !synth_snr_opt->empty());
        if (mr->parsed())
            return run_multirank(mr_common, mr_input, mr_epsilon, mr_rmax);
        if (fit->parsed())
            return run_fit(fit_common, fit_input, fit_method, fit_rank, fit_epsilon, fit_rmax,
                           fit_multirank, fit_force);
        if (cmp->parsed())
            return run_compare(cmp_common, cmp_shape, cmp_multirank, cmp_rank, cmp_snr,
                               !cmp_snr_opt->empty(), cmp_seeds, cmp_epsilon, cmp_known,
                               cmp_force);
    } catch (const nntf::convergence_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNotConverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

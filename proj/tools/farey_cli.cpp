// fareystat: spacing statistics of congruence-restricted Farey sequences.
//
// Subcommands cover gap CDFs, repulsion estimates, h-spacings, numerator
// statistics, equidistribution reports, the Monte Carlo section law, and the
// Erdos-Szusz-Turan measures. Data goes to files (CSV or JSON); stdout carries
// a one-line summary. Exit codes: 0 ok, 2 validation error, 3 truncation
// budget exceeded.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "farey/est_measure.hpp"
#include "farey/gap_stats.hpp"
#include "farey/parallel.hpp"
#include "farey/report.hpp"
#include "farey/section_dynamics.hpp"

using namespace farey;
using nlohmann::json;

namespace {

constexpr u64 kDefaultSeed = 0x5eedfa123ULL;

struct CommonOpts {
    std::string m_spec = "1";
    std::string subset = "all";
    std::string subset_file;
    std::string interval = "0,1";
    std::string output;
    std::string format = "csv";
    int threads = 0;
    u64 seed = kDefaultSeed;
    bool seed_set = false;
    bool m_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_interval = true) {
    cmd->add_option("--m", o.m_spec, "modulus (density accepts a comma list)")
        ->each([&o](const std::string&) { o.m_set = true; });
    cmd->add_option("--subset", o.subset,
                    "subset spec: all | den≡r | num≢0 | m:n1,n2;n1,n2;...");
    cmd->add_option("--subset-file", o.subset_file, "matrix-set file (header m=<modulus>)");
    if (with_interval) cmd->add_option("--I", o.interval, "interval x1,x2 as rationals");
    cmd->add_option("--output", o.output, "output file (default <command>.<format>)");
    cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--threads", o.threads, "worker count (default: logical cores)");
    cmd->add_option("--seed", o.seed, "RNG seed (FAREY_SEED env overrides the default)")
        ->each([&o](const std::string&) { o.seed_set = true; });
}

u64 effective_seed(const CommonOpts& o) {
    if (o.seed_set) return o.seed;
    if (const char* env = std::getenv("FAREY_SEED")) return std::strtoull(env, nullptr, 0);
    return o.seed;
}

int effective_threads(const CommonOpts& o) {
    if (o.threads > 0) return o.threads;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

i64 parse_m_single(const std::string& s) {
    i64 m = std::stoll(s);
    if (m < 1) throw std::domain_error("m must be a positive integer");
    return m;
}

CosetSubset build_subset(const CommonOpts& o, i64 m) {
    if (!o.subset_file.empty()) {
        auto M = load_matrix_set(o.subset_file);
        if (o.m_set && M.m != m)
            throw std::domain_error("subset file modulus disagrees with --m");
        return M;
    }
    return parse_subset_spec(o.subset, m);
}

std::pair<Rat, Rat> parse_interval(const std::string& s) {
    auto comma = s.find(',');
    if (comma == std::string::npos) throw std::domain_error("interval must be x1,x2");
    Rat x1 = rat_parse(s.substr(0, comma));
    Rat x2 = rat_parse(s.substr(comma + 1));
    if (x1 < Rat(0) || x2 > Rat(1) || x2 < x1)
        throw std::domain_error("interval must satisfy 0 <= x1 <= x2 <= 1");
    return {x1, x2};
}

std::string default_output(const std::string& cmd, const std::string& format) {
    return cmd + "." + format;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << j.dump(2) << "\n";
}

void summary(const std::string& line) { std::cout << line << "\n"; }

// --- gaps ------------------------------------------------------------------

struct GapsOpts : CommonOpts {
    i64 Q = 100;
};

void run_gaps(const GapsOpts& o) {
    i64 m = parse_m_single(o.m_spec);
    auto M = build_subset(o, m);
    auto [x1, x2] = parse_interval(o.interval);
    auto samples = parallel_collect_revised(o.Q, x1, x2, M, effective_threads(o));
    if (samples.empty()) throw std::domain_error("fewer than two retained fractions");
    auto cdf = EmpiricalCDF::from_rats(std::move(samples));

    RepulsionEstimate rep;
    rep.min_revised_gap = cdf.min();
    if (M.den1_family() || M.m == 1) rep.predicted = predicted_repulsion_unrevised(M.m);

    std::string path = o.output.empty() ? default_output("gaps", o.format) : o.output;
    if (o.format == "csv") {
        CsvWriter csv(path);
        csv.header("c,cdf");
        double hi = cdf.quantile(0.99);
        for (int k = 1; k <= 200; ++k) {
            double c = hi * double(k) / 200.0;
            csv.row(c, cdf.eval(c));
        }
    } else {
        json j;
        j["Q"] = o.Q;
        j["m"] = M.m;
        j["subset"] = M.label;
        j["N"] = cdf.n();
        j["min_gap"] = sig12(cdf.min());
        j["predicted_repulsion"] = rep.predicted ? json(sig12(*rep.predicted)) : json(nullptr);
        j["deviation"] = sig12(std::abs(cdf.min() - 1.0));
        write_json(path, j);
    }
    summary("gaps Q=" + std::to_string(o.Q) + " m=" + std::to_string(M.m) + " subset=" + M.label +
            " N=" + std::to_string(cdf.n()) + " min_revised=" + fmt12(cdf.min()) + " -> " + path);
}

// --- repulsion ---------------------------------------------------------------

void run_repulsion(const GapsOpts& o) {
    i64 m = parse_m_single(o.m_spec);
    auto M = build_subset(o, m);
    auto [x1, x2] = parse_interval(o.interval);
    auto rep = repulsion_from_stream(o.Q, x1, x2, M);

    std::string path = o.output.empty() ? default_output("repulsion", o.format) : o.output;
    double deviation = std::abs(rep.min_revised_gap - 1.0);
    if (o.format == "csv") {
        CsvWriter csv(path);
        csv.header("min_revised_gap,predicted_unrevised,deviation");
        csv.row(rep.min_revised_gap, rep.predicted ? fmt12(*rep.predicted) : std::string(""),
                deviation);
    } else {
        json j;
        j["Q"] = o.Q;
        j["m"] = M.m;
        j["subset"] = M.label;
        j["min_gap"] = sig12(rep.min_revised_gap);
        j["predicted_repulsion"] = rep.predicted ? json(sig12(*rep.predicted)) : json(nullptr);
        j["deviation"] = sig12(deviation);
        write_json(path, j);
    }
    summary("repulsion Q=" + std::to_string(o.Q) + " m=" + std::to_string(M.m) +
            " min_revised=" + fmt12(rep.min_revised_gap) +
            (rep.predicted ? " predicted_unrevised=" + fmt12(*rep.predicted) : "") + " -> " + path);
}

// --- hspacing ----------------------------------------------------------------

struct HOpts : CommonOpts {
    i64 Q = 100;
    int h = 2;
};

void run_hspacing(const HOpts& o) {
    i64 m = parse_m_single(o.m_spec);
    auto M = build_subset(o, m);
    auto [x1, x2] = parse_interval(o.interval);
    std::vector<Fraction> points;
    {
        SubsetStream s(o.Q, x1, x2, M);
        while (auto r = s.next()) points.push_back(r->beta);
    }
    auto hs = h_spacings(points, o.h, o.Q);

    std::string path = o.output.empty() ? default_output("hspacing", "csv") : o.output;
    CsvWriter csv(path);
    std::string head;
    for (int j = 1; j <= o.h; ++j) head += (j > 1 ? ",v" : "v") + std::to_string(j);
    csv.header(head);
    for (std::size_t i = 0; i < hs.rows(); ++i) {
        std::string line;
        auto row = hs.row(i);
        for (int j = 0; j < o.h; ++j) line += (j ? "," : "") + fmt12(row[std::size_t(j)]);
        csv.raw(line);
    }
    summary("hspacing Q=" + std::to_string(o.Q) + " h=" + std::to_string(o.h) +
            " windows=" + std::to_string(hs.rows()) + " -> " + path);
}

// --- numerators ---------------------------------------------------------------

void run_numerators(const GapsOpts& o) {
    i64 m = parse_m_single(o.m_spec);
    auto M = build_subset(o, m);
    auto [x1, x2] = parse_interval(o.interval);
    SubsetStream s(o.Q, x1, x2, M);
    GapRecordStream g(s);
    std::map<i64, i64> counts;
    i64 total = 0;
    while (auto r = g.next()) {
        counts[r->numerator_diff]++;
        ++total;
    }
    if (total == 0) throw std::domain_error("fewer than two retained fractions");

    std::string path = o.output.empty() ? default_output("numerators", o.format) : o.output;
    if (o.format == "csv") {
        CsvWriter csv(path);
        csv.header("c3,frequency");
        for (auto [k, c] : counts) csv.row(k, double(c) / double(total));
    } else {
        json j;
        j["Q"] = o.Q;
        j["m"] = M.m;
        j["subset"] = M.label;
        j["N"] = total;
        json freq = json::object();
        for (auto [k, c] : counts) freq[std::to_string(k)] = sig12(double(c) / double(total));
        j["frequencies"] = freq;
        write_json(path, j);
    }
    summary("numerators Q=" + std::to_string(o.Q) + " m=" + std::to_string(M.m) + " keys=" +
            std::to_string(counts.size()) + " N=" + std::to_string(total) + " -> " + path);
}

// --- equidist -----------------------------------------------------------------

struct EquidistOpts : CommonOpts {
    i64 Q = 1000;
    int bins = 10;
};

void run_equidist(const EquidistOpts& o) {
    i64 m = parse_m_single(o.m_spec);
    auto M = build_subset(o, m);
    auto rep = equidistribution_report(o.Q, M, o.bins);

    std::string path = o.output.empty() ? default_output("equidist", o.format) : o.output;
    if (o.format == "csv") {
        CsvWriter csv(path);
        csv.header("bin_lo,bin_hi,count");
        for (int b = 0; b < o.bins; ++b)
            csv.row(double(b) / o.bins, double(b + 1) / o.bins, (long long)rep.counts[std::size_t(b)]);
    } else {
        json j;
        j["Q"] = o.Q;
        j["m"] = M.m;
        j["subset"] = M.label;
        j["bins"] = o.bins;
        j["counts"] = rep.counts;
        j["max_rel_deviation"] = sig12(rep.max_rel_deviation);
        write_json(path, j);
    }
    summary("equidist Q=" + std::to_string(o.Q) + " m=" + std::to_string(M.m) + " bins=" +
            std::to_string(o.bins) + " max_rel_dev=" + fmt12(rep.max_rel_deviation) + " -> " + path);
}

// --- section-mc ----------------------------------------------------------------

struct SectionOpts : CommonOpts {
    i64 samples = 1'000'000;
    double grid_max = 10.0;
    int grid_points = 50;
    i64 max_steps = kDefaultMaxSteps;
};

void run_section_mc(const SectionOpts& o) {
    i64 m = parse_m_single(o.m_spec);
    auto M = build_subset(o, m);
    auto mc = mc_return_cdf(M, o.samples, effective_seed(o), effective_threads(o), o.max_steps);
    double thr = mc.cdf.quantile(1e-4);

    std::string path = o.output.empty() ? default_output("section-mc", o.format) : o.output;
    if (o.format == "csv") {
        CsvWriter csv(path);
        csv.header("c,cdf");
        for (int k = 1; k <= o.grid_points; ++k) {
            double c = o.grid_max * double(k) / double(o.grid_points);
            csv.row(c, mc.cdf.eval(c));
        }
    } else {
        json j;
        j["m"] = M.m;
        j["subset"] = M.label;
        j["samples"] = mc.samples;
        j["truncated"] = mc.truncated;
        json grid = json::array();
        for (int k = 1; k <= o.grid_points; ++k) {
            double c = o.grid_max * double(k) / double(o.grid_points);
            grid.push_back({sig12(c), sig12(mc.cdf.eval(c))});
        }
        j["cdf"] = grid;
        j["support_threshold"] = sig12(thr);
        write_json(path, j);
    }
    summary("section-mc m=" + std::to_string(M.m) + " subset=" + M.label + " samples=" +
            std::to_string(mc.samples) + " truncated=" + std::to_string(mc.truncated) +
            " support_threshold=" + fmt12(thr) + " -> " + path);
}

// --- est ------------------------------------------------------------------------

struct EstOpts : CommonOpts {
    i64 n = 1000;
    std::string alpha = "1/100";
    std::string c = "2";
    std::string n_grid;
    int K = -1;  // -1: detect
    i64 samples = 200'000;
    i64 max_steps = kDefaultMaxSteps;
};

void run_est(const EstOpts& o) {
    i64 m = parse_m_single(o.m_spec);
    auto M = build_subset(o, m);
    auto [x1, x2] = parse_interval(o.interval);
    Rat alpha = rat_parse(o.alpha);
    Rat c = rat_parse(o.c);
    if (!(alpha > Rat(0))) throw std::domain_error("alpha must be positive");
    if (c < Rat(1)) throw std::domain_error("c must be >= 1");

    std::vector<i64> grid;
    if (o.n_grid.empty()) {
        for (i64 n : {o.n / 4, o.n / 2, o.n})
            if (n >= 1) grid.push_back(n);
    } else {
        std::stringstream gs(o.n_grid);
        std::string tok;
        while (std::getline(gs, tok, ',')) grid.push_back(std::stoll(tok));
    }
    if (grid.empty()) throw std::domain_error("empty n grid");

    Interval I{x1, x2};
    auto table = est_convergence(alpha, c, M, I, grid);
    i64 K = o.K >= 0 ? o.K : detect_overlap_depth(alpha, c, M, grid.back());
    auto mc = est_limit_section_mc(alpha, c, M, int(K), o.samples, effective_seed(o),
                                   effective_threads(o), o.max_steps);

    std::string path = o.output.empty() ? default_output("est", o.format) : o.output;
    if (o.format == "csv") {
        CsvWriter csv(path);
        csv.header("n,lambda,delta");
        for (const auto& row : table.rows) csv.row((long long)row.n, row.lambda, row.delta);
    } else {
        json j;
        j["alpha"] = alpha.str();
        j["c"] = c.str();
        j["m"] = M.m;
        j["subset"] = M.label;
        j["I"] = x1.str() + "," + x2.str();
        json rows = json::array();
        for (const auto& row : table.rows)
            rows.push_back({row.n, sig12(row.lambda), sig12(row.delta)});
        j["table"] = rows;
        j["limit_estimate"] = sig12(table.limit_estimate);
        j["K_detected"] = K;
        j["section_mc_estimate"] = sig12(mc.value);
        j["mc_stderr"] = sig12(mc.stderr_);
        write_json(path, j);
    }
    summary("est n=" + std::to_string(o.n) + " alpha=" + alpha.str() + " c=" + c.str() + " m=" +
            std::to_string(M.m) + " lambda=" + fmt12(table.limit_estimate) + " K=" +
            std::to_string(K) + " section_mc=" + fmt12(mc.value) + " -> " + path);
}

// --- density --------------------------------------------------------------------

struct DensityOpts : CommonOpts {
    i64 Q = 1000;
    int bins = 200;
};

void run_density(const DensityOpts& o) {
    std::vector<i64> ms;
    {
        std::stringstream ss(o.m_spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) ms.push_back(parse_m_single(tok));
    }
    if (ms.empty()) throw std::domain_error("density: need at least one modulus");
    auto [x1, x2] = parse_interval(o.interval);

    std::string stem = o.output.empty() ? "density" : o.output;
    auto dot = stem.rfind('.');
    std::string ext = ".csv";
    if (dot != std::string::npos && o.output.size()) {
        ext = stem.substr(dot);
        stem = stem.substr(0, dot);
    }

    std::string files;
    for (i64 m : ms) {
        auto M = parse_subset_spec(o.subset, m);
        auto samples = parallel_collect_revised(o.Q, x1, x2, M, effective_threads(o));
        if (samples.empty()) throw std::domain_error("fewer than two retained fractions");
        auto cdf = EmpiricalCDF::from_rats(std::move(samples));
        double hi = cdf.quantile(0.99);
        auto hist = Histogram::uniform(0.0, hi, o.bins);
        for (double v : cdf.values()) hist.add(v);

        std::string path = stem + "_m" + std::to_string(m) + ext;
        CsvWriter csv(path);
        csv.header("bin_lo,bin_hi,density");
        for (std::size_t b = 0; b < hist.counts.size(); ++b)
            csv.row(hist.edges[b], hist.edges[b + 1], hist.bin_value(b, Histogram::Norm::density));
        files += (files.empty() ? "" : " ") + path;
    }
    summary("density Q=" + std::to_string(o.Q) + " m=" + o.m_spec + " subset=" + o.subset +
            " -> " + files);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spacing statistics of congruence-restricted Farey sequences"};
    app.require_subcommand(1);

    GapsOpts gaps_o;
    auto* gaps = app.add_subcommand("gaps", "revised gap CDF of the restricted sequence");
    gaps->add_option("--Q", gaps_o.Q, "Farey order")->required();
    add_common(gaps, gaps_o);

    GapsOpts rep_o;
    auto* rep = app.add_subcommand("repulsion", "smallest revised gap vs. the predicted repulsion");
    rep->add_option("--Q", rep_o.Q, "Farey order")->required();
    add_common(rep, rep_o);

    HOpts h_o;
    auto* hsp = app.add_subcommand("hspacing", "consecutive h-spacing vectors, Q^2-scaled");
    hsp->set_help_flag("--help", "print help");  // frees -h / --h
    hsp->add_option("--Q", h_o.Q, "Farey order")->required();
    hsp->add_option("--h", h_o.h, "window length");
    add_common(hsp, h_o);

    GapsOpts num_o;
    auto* num = app.add_subcommand("numerators", "frequencies of b*q - a*p over consecutive pairs");
    num->add_option("--Q", num_o.Q, "Farey order")->required();
    add_common(num, num_o);

    EquidistOpts eq_o;
    auto* eq = app.add_subcommand("equidist", "bin counts over [0,1] and max relative deviation");
    eq->add_option("--Q", eq_o.Q, "Farey order")->required();
    eq->add_option("--bins", eq_o.bins, "number of bins");
    add_common(eq, eq_o, false);

    SectionOpts sec_o;
    auto* sec = app.add_subcommand("section-mc", "Monte Carlo first-return law of the lifted section");
    sec->add_option("--samples", sec_o.samples, "sample count");
    sec->add_option("--grid-max", sec_o.grid_max, "largest c on the output grid");
    sec->add_option("--grid-points", sec_o.grid_points, "grid size");
    sec->add_option("--max-steps", sec_o.max_steps, "per-orbit step budget");
    add_common(sec, sec_o, false);

    EstOpts est_o;
    auto* est = app.add_subcommand("est", "Erdos-Szusz-Turan measures and their limit");
    est->add_option("--n", est_o.n, "denominator threshold")->required();
    est->add_option("--alpha", est_o.alpha, "approximation quality (rational)");
    est->add_option("--c", est_o.c, "denominator range factor (rational, >= 1)");
    est->add_option("--n-grid", est_o.n_grid, "comma list of n values (default n/4,n/2,n)");
    est->add_option("--K", est_o.K, "overlap depth override (default: detected)");
    est->add_option("--samples", est_o.samples, "section MC sample count");
    est->add_option("--max-steps", est_o.max_steps, "per-orbit step budget");
    add_common(est, est_o);

    DensityOpts den_o;
    auto* den = app.add_subcommand("density", "revised gap density tables (one file per modulus)");
    den->add_option("--Q", den_o.Q, "Farey order")->required();
    den->add_option("--bins", den_o.bins, "histogram bins");
    add_common(den, den_o);

    gaps->callback([&] { run_gaps(gaps_o); });
    rep->callback([&] { run_repulsion(rep_o); });
    hsp->callback([&] { run_hspacing(h_o); });
    num->callback([&] { run_numerators(num_o); });
    eq->callback([&] { run_equidist(eq_o); });
    sec->callback([&] { run_section_mc(sec_o); });
    est->callback([&] { run_est(est_o); });
    den->callback([&] { run_density(den_o); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const truncation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

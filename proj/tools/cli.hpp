/**
 * @file cli.hpp
 * @brief The `epiens` command line: datasets, fit, diagnose, forecast, verify.
 *
 * Exit codes: 0 success, 2 usage, 3 data/parse, 4 fit failure or ensemble
 * collapse, 5 I/O.
 */
#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "epiens/epiens.hpp"
#include "epiens/report.hpp"

namespace epiens::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 2,
    kData = 3,
    kCollapse = 4,
    kIo = 5,
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Effective configuration of one run; echoed into every JSON output.
struct RunConfig {
    std::string command;
    std::string dataset;
    std::string input;
    std::optional<int> issuance_day;
    int horizon_days = 30;
    int members = 30;
    int lag_forward = 10;
    int lag_backward = 10;
    double sigma_scale = 0.1;
    std::uint64_t seed = 1;
    std::string noise_model = "daily";
    double qc_threshold = kDefaultQcThreshold;
    bool qc = true;
    int readiness_k = kDefaultReadinessK;
    std::string format = "json";
    std::string out_dir;
    std::string forecast_file;
    double min_success = 2.0 / 3.0;
    int correction_passes = FitOptions{}.correction_passes;
    unsigned threads = 0;

    FitOptions fit_options() const {
        FitOptions o;
        o.correction_passes = correction_passes;
        return o;
    }

    EnsembleConfig ensemble(int issuance) const {
        EnsembleConfig c;
        c.n_members = members;
        c.n_lag_forward = lag_forward;
        c.n_lag_backward = lag_backward;
        c.sigma_scale = sigma_scale;
        c.seed = seed;
        c.horizon_days = horizon_days;
        c.issuance_day = issuance;
        c.noise = noise_model_from_string(noise_model);
        c.threads = threads;
        c.min_success_fraction = min_success;
        c.fit = fit_options();
        return c;
    }
};

/// Thread count is execution detail and deliberately not echoed.
inline json to_json(const RunConfig& c) {
    return {{"command", c.command},
            {"dataset", c.dataset.empty() ? json(nullptr) : json(c.dataset)},
            {"input", c.input.empty() ? json(nullptr) : json(c.input)},
            {"issuance_day", detail::opt(c.issuance_day)},
            {"horizon_days", c.horizon_days},
            {"members", c.members},
            {"lag_forward", c.lag_forward},
            {"lag_backward", c.lag_backward},
            {"sigma_scale", c.sigma_scale},
            {"seed", c.seed},
            {"noise_model", c.noise_model},
            {"min_success", c.min_success},
            {"correction_passes", c.correction_passes},
            {"qc", c.qc},
            {"qc_threshold", c.qc_threshold},
            {"readiness_k", c.readiness_k},
            {"format", c.format},
            {"out_dir", c.out_dir.empty() ? json(nullptr) : json(c.out_dir)},
            {"forecast_file", c.forecast_file.empty() ? json(nullptr) : json(c.forecast_file)}};
}

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("failed writing " + path.string());
}

struct LoadedSeries {
    CaseSeries raw;
    CaseSeries series;  ///< after QC
    QcReport qc;
    std::vector<std::string> warnings;
};

inline LoadedSeries load(const RunConfig& cfg) {
    LoadedSeries out;
    if (!cfg.input.empty()) {
        auto parsed = parse_csv(read_file(cfg.input), std::filesystem::path(cfg.input).stem().string());
        out.raw = std::move(parsed.series);
        out.warnings = std::move(parsed.warnings);
    } else if (!cfg.dataset.empty()) {
        out.raw = bundled_dataset(cfg.dataset);
    } else {
        throw ValueError("one of --dataset or --input is required");
    }
    if (cfg.qc && out.raw.size() >= 3) {
        auto [s, report] = qc_correct(out.raw, cfg.qc_threshold);
        out.series = std::move(s);
        out.qc = std::move(report);
    } else {
        out.series = out.raw;
        out.qc.threshold_used = cfg.qc_threshold;
    }
    return out;
}

inline json series_json(const LoadedSeries& s) {
    return {{"label", s.series.label()},
            {"first_day", s.series.first_day()},
            {"last_day", s.series.last_day()},
            {"qc", to_json(s.qc)},
            {"warnings", s.warnings}};
}

inline void emit(std::ostream& out, const RunConfig& cfg, const std::string& name, const std::string& content) {
    if (cfg.out_dir.empty()) {
        out << content;
    } else {
        write_file(std::filesystem::path(cfg.out_dir) / name, content);
    }
}

inline int cmd_datasets(const RunConfig& cfg, std::ostream& out) {
    if (cfg.format == "csv") {
        std::ostringstream os;
        os << "name,days,last_cumulative\n";
        for (auto name : kDatasetNames) {
            const auto s = bundled_dataset(name);
            os << name << ',' << s.size() << ',' << epiens::detail::format_number(s.cumulative().back()) << '\n';
        }
        emit(out, cfg, "datasets.csv", os.str());
    } else {
        json rows = json::array();
        for (auto name : kDatasetNames) {
            const auto s = bundled_dataset(name);
            rows.push_back({{"name", name},
                            {"days", s.size()},
                            {"first_day", s.first_day()},
                            {"last_day", s.last_day()},
                            {"last_cumulative", s.cumulative().back()}});
        }
        emit(out, cfg, "datasets.json", json{{"config", to_json(cfg)}, {"datasets", rows}}.dump(2) + "\n");
    }
    return kOk;
}

inline int cmd_fit(const RunConfig& cfg, std::ostream& out) {
    const auto s = load(cfg);
    const int last = cfg.issuance_day.value_or(s.series.last_day());
    const auto r = fit(s.series, last, cfg.fit_options());
    json j = {{"config", to_json(cfg)}, {"series", series_json(s)}, {"fit", to_json(r)}};
    if (r.solution) {
        const auto q = fit_quality(r, s.series, r.first_day, s.series.last_day());
        json qj = to_json(q);
        qj["range"] = {r.first_day, s.series.last_day()};
        j["quality"] = qj;
        try {
            j["doubling_time_days"] = doubling_time(r.params, s.series.at(r.last_day));
        } catch (const ModelError&) {
            j["doubling_time_days"] = nullptr;
        }
    }
    emit(out, cfg, "fit.json", j.dump(2) + "\n");
    return r.valid_for_forecast ? kOk : kCollapse;
}

inline int cmd_diagnose(const RunConfig& cfg, std::ostream& out) {
    const auto s = load(cfg);
    const auto series = s.series.slice(s.series.first_day(), cfg.issuance_day.value_or(s.series.last_day()));
    const auto verdict = readiness(series, cfg.readiness_k);
    if (cfg.format == "csv") {
        emit(out, cfg, "diagnose.csv", diagnostics_csv(series, verdict));
    } else {
        const auto ds = derivatives(series);
        json rows = json::array();
        for (std::size_t i = 0; i < ds.days.size(); ++i) {
            rows.push_back({{"day", ds.days[i]},
                            {"increment", epiens::detail::opt(ds.first[i])},
                            {"second_diff", epiens::detail::opt(ds.second[i])},
                            {"smoothed_increment", epiens::detail::opt(ds.smoothed_first[i])},
                            {"smoothed_second_diff", epiens::detail::opt(ds.smoothed_second[i])}});
        }
        json j = {{"config", to_json(cfg)},
                  {"series", series_json(s)},
                  {"readiness", to_json(verdict)},
                  {"concavity_sign_change_day", epiens::detail::opt(concavity_sign_change(ds))},
                  {"days", rows}};
        emit(out, cfg, "diagnose.json", j.dump(2) + "\n");
    }
    return kOk;
}

inline int issuance_of(const RunConfig& cfg, const CaseSeries& s) { return cfg.issuance_day.value_or(s.last_day()); }

inline std::optional<ReadinessVerdict> try_readiness(const CaseSeries& s, int issuance, int k) {
    const auto upto = s.slice(s.first_day(), issuance);
    if (upto.size() < 5) return std::nullopt;
    return readiness(upto, k);
}

inline int report_collapse(const EnsembleCollapse& e, const std::optional<ReadinessVerdict>& verdict,
                           std::ostream& err) {
    err << "ensemble collapse: " << e.what() << '\n';
    if (verdict) {
        err << "readiness: " << (verdict->ready ? "ready" : "not ready") << " - " << verdict->explanation << '\n';
    }
    for (const auto& r : e.member_reasons()) err << "  " << r << '\n';
    return kCollapse;
}

inline int cmd_forecast(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto s = load(cfg);
    const int issuance = issuance_of(cfg, s.series);
    const auto verdict = try_readiness(s.series, issuance, cfg.readiness_k);
    EnsembleForecast f;
    try {
        f = generate(s.series, cfg.ensemble(issuance));
    } catch (const EnsembleCollapse& e) {
        return report_collapse(e, verdict, err);
    }
    json j = {{"config", to_json(cfg)},
              {"series", series_json(s)},
              {"readiness", verdict ? to_json(*verdict) : json(nullptr)},
              {"forecast", to_json(f)}};
    if (cfg.out_dir.empty()) {
        out << (cfg.format == "csv" ? fan_csv(f) : j.dump(2) + "\n");
        return kOk;
    }
    const std::filesystem::path dir(cfg.out_dir);
    write_file(dir / "forecast.json", j.dump(2) + "\n");
    write_file(dir / "fan.csv", fan_csv(f));
    write_file(dir / "members.csv", members_csv(f));
    write_file(dir / "plot.dat", plot_data(s.series, f));
    return kOk;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto s = load(cfg);
    EnsembleForecast f;
    std::optional<ReadinessVerdict> verdict;
    if (!cfg.forecast_file.empty()) {
        json saved;
        try {
            saved = json::parse(read_file(cfg.forecast_file));
        } catch (const json::exception& e) {
            throw ParseError(1, std::string("forecast file: ") + e.what());
        }
        f = forecast_from_json(saved.contains("forecast") ? saved.at("forecast") : saved);
    } else {
        const int issuance = issuance_of(cfg, s.series);
        verdict = try_readiness(s.series, issuance, cfg.readiness_k);
        try {
            f = generate(s.series, cfg.ensemble(issuance));
        } catch (const EnsembleCollapse& e) {
            return report_collapse(e, verdict, err);
        }
    }
    const int from = f.issuance_day + 1;
    const int to = f.days.empty() ? from : f.days.back();
    json j = {{"config", to_json(cfg)}, {"series", series_json(s)}, {"issuance_day", f.issuance_day}};
    j["ensemble"] = to_json(verify_ensemble(f, s.series, from, to));
    if (cfg.forecast_file.empty()) {
        const auto det = fit(s.series, f.issuance_day, cfg.fit_options());
        if (det.solution) {
            const int hi = std::min(to, s.series.last_day());
            j["deterministic"] = to_json(verify_deterministic(det, s.series, from, hi));
        }
    }
    emit(out, cfg, "verify.json", j.dump(2) + "\n");
    return kOk;
}

} // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Ensemble forecasts of cumulative case counts from perturbed logistic fits", "epiens"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value configuration file; command-line flags take precedence");

    RunConfig cfg;
    app.add_option("--dataset", cfg.dataset, "bundled dataset: china, italy, south_korea, uk");
    app.add_option("--input", cfg.input, "CSV file with header date,day,confirmed,cumulative");
    app.add_option("--issuance-day", cfg.issuance_day, "last observed day used for training");
    app.add_option("--horizon", cfg.horizon_days, "forecast horizon in days")->capture_default_str();
    app.add_option("--members", cfg.members, "ensemble size")->capture_default_str();
    app.add_option("--lag-forward", cfg.lag_forward, "members shifted one day forward")->capture_default_str();
    app.add_option("--lag-backward", cfg.lag_backward, "members shifted one day backward")->capture_default_str();
    app.add_option("--sigma-scale", cfg.sigma_scale, "perturbation scale")->capture_default_str();
    app.add_option("--noise-model", cfg.noise_model, "daily or pooled")
        ->check(CLI::IsMember({"daily", "pooled"}))
        ->capture_default_str();
    app.add_option("--min-success", cfg.min_success, "fraction of members that must fit")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app.add_option("--correction-passes", cfg.correction_passes, "discretization correction refits (0 = plain)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    app.add_option("--qc-threshold", cfg.qc_threshold, "outlier ratio threshold")->capture_default_str();
    app.add_flag("!--no-qc", cfg.qc, "skip outlier correction");
    app.add_option("--readiness-k", cfg.readiness_k, "consecutive negative concavity days")->capture_default_str();
    app.add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    app.add_option("--out-dir", cfg.out_dir, "write output files here instead of stdout");
    app.add_option("--forecast", cfg.forecast_file, "verify: saved forecast JSON instead of a fresh run");
    app.add_option("--threads", cfg.threads, "worker threads for member fits (0 = all cores)");

    auto* datasets = app.add_subcommand("datasets", "list bundled datasets")->fallthrough();
    auto* fit_cmd = app.add_subcommand("fit", "fit one logistic curve")->fallthrough();
    auto* diagnose = app.add_subcommand("diagnose", "derivatives and forecast readiness")->fallthrough();
    auto* forecast = app.add_subcommand("forecast", "ensemble forecast")->fallthrough();
    auto* verify = app.add_subcommand("verify", "score a forecast against observations")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*datasets) return cfg.command = "datasets", detail::cmd_datasets(cfg, out);
        if (*fit_cmd) return cfg.command = "fit", detail::cmd_fit(cfg, out);
        if (*diagnose) return cfg.command = "diagnose", detail::cmd_diagnose(cfg, out);
        if (*forecast) return cfg.command = "forecast", detail::cmd_forecast(cfg, out, err);
        if (*verify) return cfg.command = "verify", detail::cmd_verify(cfg, out, err);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const EnsembleCollapse& e) {
        err << "error: " << e.what() << '\n';
        return kCollapse;
    } catch (const DegenerateDesign& e) {
        err << "error: " << e.what() << '\n';
        return kCollapse;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}

} // namespace epiens::cli

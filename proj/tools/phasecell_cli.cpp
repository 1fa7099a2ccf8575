// phasecell: command-line harness around the phasecell shared library.
//
// Subcommands: simulate-sweep, calibrate, evaluate, fig6, freq-study.
// Exit codes: 0 success, 2 input/format error, 3 precondition violation.
//
// Deliberately built on the public C API only, the same surface an embedded
// integration would use.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "phasecell.h"

using nlohmann::json;

namespace {

struct CliError {
    int exit_code;
    std::string message;
};

[[noreturn]] void die(int exit_code, const std::string& message) {
    throw CliError{exit_code, message};
}

int exit_code_for(pdc_status status) {
    return status == PDC_ERR_PRECONDITION ? 3 : 2;
}

void check(pdc_status status, const std::string& context) {
    if (status != PDC_OK)
        die(exit_code_for(status), context + ": " + pdc_last_error());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) die(2, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Write through a temp file and rename so partial output never lands.
void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) die(2, "cannot write " + tmp);
        out << content;
        if (!out) die(2, "write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) die(2, "cannot rename " + tmp);
}

// ------------------------------------------------------------- configuration

struct Scenario {
    std::vector<pdc_harmonic> harmonics;
    pdc_detector_params detector{1.0, 1.0, 0.0, 0.0, 0.0, 0.0, nullptr, 0, 0.0};
    pdc_adc_params adc{10, -1.5, 1.5, 1.0, 0.0};
    double sweep_step = 1.0;
    double eval_step = 0.1;
    uint64_t seed = 0;
    std::optional<double> frequency;
    std::vector<pdc_profile_anchor> profile;
    std::vector<double> frequencies;

    const pdc_detector_params* params() {
        detector.harmonics = harmonics.empty() ? nullptr : harmonics.data();
        detector.harmonic_count = harmonics.size();
        return &detector;
    }
};

double num_or(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) die(2, std::string("config: ") + key + " must be a number");
    return j.at(key).get<double>();
}

Scenario load_scenario(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        die(2, "config " + path + ": " + e.what());
    }
    Scenario sc;
    try {
        if (j.contains("detector")) {
            const json& d = j.at("detector");
            sc.detector.gain_i = num_or(d, "gain_i", 1.0);
            sc.detector.gain_q = num_or(d, "gain_q", 1.0);
            sc.detector.offset_i = num_or(d, "offset_i", 0.0);
            sc.detector.offset_q = num_or(d, "offset_q", 0.0);
            sc.detector.delta_q = num_or(d, "delta_q", 0.0);
            sc.detector.eps_i = num_or(d, "eps_i", 0.0);
            sc.detector.noise_sigma = num_or(d, "noise_sigma", 0.0);
            for (const json& h : d.value("harmonics", json::array()))
                sc.harmonics.push_back({h.at("order").get<int32_t>(),
                                        h.at("amplitude").get<double>(),
                                        num_or(h, "phase_deg", 0.0)});
        }
        if (j.contains("adc")) {
            const json& a = j.at("adc");
            sc.adc.bits = static_cast<int32_t>(num_or(a, "bits", 10));
            sc.adc.v_min = num_or(a, "v_min", -1.5);
            sc.adc.v_max = num_or(a, "v_max", 1.5);
            sc.adc.conditioner_gain = num_or(a, "conditioner_gain", 1.0);
            sc.adc.conditioner_offset = num_or(a, "conditioner_offset", 0.0);
        }
        sc.sweep_step = num_or(j, "sweep_step", 1.0);
        sc.eval_step = num_or(j, "eval_step", 0.1);
        if (j.contains("seed")) sc.seed = j.at("seed").get<uint64_t>();
        if (j.contains("frequency")) sc.frequency = j.at("frequency").get<double>();
        if (j.contains("frequency_profile"))
            for (const json& a : j.at("frequency_profile").at("anchors"))
                sc.profile.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
        if (j.contains("frequencies"))
            for (const json& f : j.at("frequencies")) sc.frequencies.push_back(f.get<double>());
    } catch (const json::exception& e) {
        die(2, "config " + path + ": " + e.what());
    }
    if (!(sc.sweep_step > 0.0) || !(sc.eval_step > 0.0))
        die(3, "config: sweep_step and eval_step must be > 0");
    if (sc.frequency) {
        if (sc.profile.empty()) die(2, "config: frequency given without frequency_profile");
        double delta = 0.0;
        check(pdc_profile_delta(sc.profile.data(), sc.profile.size(), *sc.frequency, &delta),
              "frequency lookup");
        sc.detector.delta_q = delta;
    }
    return sc;
}

// ------------------------------------------------------------------- helpers

std::vector<pdc_sweep_record> run_sweep(Scenario& sc, uint64_t seed) {
    size_t count = 0;
    check(pdc_simulate_sweep(sc.params(), sc.sweep_step, &seed, nullptr, 0, &count),
          "simulate sweep");
    std::vector<pdc_sweep_record> sweep(count);
    check(pdc_simulate_sweep(sc.params(), sc.sweep_step, &seed, sweep.data(), sweep.size(),
                             &count),
          "simulate sweep");
    sweep.resize(count);
    return sweep;
}

std::string sweep_csv(const std::vector<pdc_sweep_record>& sweep) {
    size_t len = 0;
    check(pdc_sweep_to_csv(sweep.data(), sweep.size(), nullptr, 0, &len), "format sweep");
    std::string csv(len, '\0');
    check(pdc_sweep_to_csv(sweep.data(), sweep.size(), csv.data(), csv.size(), &len),
          "format sweep");
    csv.resize(len - 1);
    return csv;
}

struct Table {
    pdc_table* handle = nullptr;
    std::vector<uint8_t> bytes;  // encoded image, for the fixed path

    Table() = default;
    Table(const Table&) = delete;
    Table& operator=(const Table&) = delete;
    ~Table() { pdc_table_free(handle); }

    void encode() {
        size_t len = 0;
        check(pdc_table_encode(handle, nullptr, 0, &len), "encode table");
        bytes.resize(len);
        check(pdc_table_encode(handle, bytes.data(), bytes.size(), &len), "encode table");
    }

    std::string to_json() const {
        size_t len = 0;
        check(pdc_table_to_json(handle, nullptr, 0, &len), "serialize table");
        std::string text(len, '\0');
        check(pdc_table_to_json(handle, text.data(), text.size(), &len), "serialize table");
        text.resize(len - 1);
        return text;
    }
};

void build_table(const std::vector<pdc_sweep_record>& sweep, Table* out) {
    check(pdc_table_build(sweep.data(), sweep.size(), &out->handle), "calibrate");
    out->encode();
}

void load_table(const std::string& path, Table* out) {
    std::string blob = read_file(path);
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".pdt") == 0) {
        out->bytes.assign(blob.begin(), blob.end());
        check(pdc_table_decode(out->bytes.data(), out->bytes.size(), &out->handle),
              "decode " + path);
    } else {
        check(pdc_table_from_json(blob.c_str(), &out->handle), "parse " + path);
        out->encode();
    }
}

void print_table_summary(const Table& table) {
    pdc_table_info info{};
    check(pdc_table_get_info(table.handle, &info), "table info");
    std::printf("delta_hat: %.4f deg\n", info.delta_hat_deg);
    static const char* names[4] = {"Quadrature/Plus", "InPhase/Minus", "Quadrature/Minus",
                                   "InPhase/Plus"};
    for (int i = 0; i < 4; ++i) {
        const pdc_section_info& s = info.sections[i];
        std::printf("section %-16s center %8.3f deg, range %6.2f deg, max_err %.4f deg\n",
                    names[i], s.center_deg, s.domain_hi_deg - s.domain_lo_deg, s.fit.max_err);
    }
}

struct ErrorReport {
    double max_abs_err = 0.0;
    double rms_err = 0.0;
    double worst_phase = 0.0;
    std::vector<std::pair<double, double>> per_phase;
};

ErrorReport evaluate_table(Scenario& sc, const Table& table, bool fixed_path, uint64_t seed) {
    ErrorReport rep;
    double sum_sq = 0.0;
    size_t k = 0;
    for (double theta = 0.0; theta < 360.0 - 1e-9; theta += sc.eval_step, ++k) {
        uint64_t sample_seed = pdc_derive_seed(seed, k);
        int32_t ci = 0, cq = 0;
        check(pdc_measure_pair(sc.params(), &sc.adc, theta, &sample_seed, &ci, &cq), "measure");
        double est;
        if (fixed_path) {
            int32_t cd = 0;
            check(pdc_estimate_phase_fixed(table.bytes.data(), table.bytes.size(), &sc.adc, ci,
                                           cq, &cd),
                  "fixed estimate");
            est = cd / 100.0;
        } else {
            // shared code front end so the float and fixed paths agree
            double vi_n = 0.0, vq_n = 0.0;
            check(pdc_normalize_codes_q15(table.bytes.data(), table.bytes.size(), &sc.adc, ci,
                                          cq, &vi_n, &vq_n),
                  "normalize");
            vi_n = std::clamp(vi_n, -1.25, 1.25);  // noise past the calibration extrema
            vq_n = std::clamp(vq_n, -1.25, 1.25);
            check(pdc_estimate_phase(table.handle, vi_n, vq_n, &est), "estimate");
        }
        double err = pdc_wrap_degrees(est - theta);
        rep.per_phase.emplace_back(theta, err);
        sum_sq += err * err;
        if (std::abs(err) > rep.max_abs_err) {
            rep.max_abs_err = std::abs(err);
            rep.worst_phase = pdc_wrap_degrees(theta);
        }
    }
    rep.rms_err = std::sqrt(sum_sq / static_cast<double>(rep.per_phase.size()));
    return rep;
}

json report_json(const ErrorReport& rep) {
    json per = json::array();
    for (const auto& [theta, err] : rep.per_phase) per.push_back({theta, err});
    return json{{"max_abs_err", rep.max_abs_err},
                {"rms_err", rep.rms_err},
                {"worst_phase", rep.worst_phase},
                {"per_phase", per}};
}

std::string report_csv(const ErrorReport& rep) {
    std::string out = "theta_deg,err_deg\n";
    char line[64];
    for (const auto& [theta, err] : rep.per_phase) {
        std::snprintf(line, sizeof line, "%.10g,%.10g\n", theta, err);
        out += line;
    }
    return out;
}

// --------------------------------------------------------------- subcommands

void cmd_simulate_sweep(const std::string& config_path, const std::string& out_path,
                        std::optional<uint64_t> seed_flag) {
    Scenario sc = load_scenario(config_path);
    auto sweep = run_sweep(sc, seed_flag.value_or(sc.seed));
    write_file_atomic(out_path, sweep_csv(sweep));
    std::printf("wrote %zu rows to %s\n", sweep.size(), out_path.c_str());
}

void cmd_calibrate(const std::string& sweep_path, const std::string& out_base) {
    std::string csv = read_file(sweep_path);
    size_t count = 0;
    check(pdc_sweep_from_csv(csv.c_str(), nullptr, 0, &count), "parse " + sweep_path);
    std::vector<pdc_sweep_record> sweep(count);
    check(pdc_sweep_from_csv(csv.c_str(), sweep.data(), sweep.size(), &count),
          "parse " + sweep_path);

    Table table;
    build_table(sweep, &table);
    write_file_atomic(out_base + ".json", table.to_json());
    write_file_atomic(out_base + ".pdt",
                      std::string(table.bytes.begin(), table.bytes.end()));
    print_table_summary(table);
    std::printf("wrote %s.json and %s.pdt (%zu bytes)\n", out_base.c_str(), out_base.c_str(),
                table.bytes.size());
}

void cmd_evaluate(const std::string& table_path, const std::string& config_path,
                  const std::string& out_base, bool fixed_path,
                  std::optional<uint64_t> seed_flag) {
    Scenario sc = load_scenario(config_path);
    Table table;
    load_table(table_path, &table);
    ErrorReport rep = evaluate_table(sc, table, fixed_path, seed_flag.value_or(sc.seed));
    write_file_atomic(out_base + ".json", report_json(rep).dump(2) + "\n");
    write_file_atomic(out_base + ".csv", report_csv(rep));
    std::printf("%s path: max |err| %.4f deg at %.2f deg, rms %.4f deg (%zu phases)\n",
                fixed_path ? "fixed" : "float", rep.max_abs_err, rep.worst_phase, rep.rms_err,
                rep.per_phase.size());
}

void cmd_fig6(double lr_min, double lr_max, double step, const std::string& out_path) {
    size_t count = 0;
    check(pdc_error_vs_lr(lr_min, lr_max, step, nullptr, 0, &count), "error curve");
    std::vector<pdc_lr_error_sample> curve(count);
    check(pdc_error_vs_lr(lr_min, lr_max, step, curve.data(), curve.size(), &count),
          "error curve");

    std::string out = "lr_deg,max_err_deg,admissible_deviation_deg\n";
    char line[96];
    for (const auto& s : curve) {
        std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g\n", s.lr_deg, s.max_err_deg,
                      s.lr_deg - 90.0);
        out += line;
    }
    write_file_atomic(out_path, out);
    std::printf("wrote %zu rows to %s\n", curve.size(), out_path.c_str());
}

void cmd_freq_study(const std::string& config_path, const std::string& out_path,
                    std::optional<uint64_t> seed_flag) {
    Scenario sc = load_scenario(config_path);
    if (sc.profile.empty()) die(2, "config: freq-study needs frequency_profile");
    if (sc.frequencies.empty()) die(2, "config: freq-study needs a frequencies list");
    uint64_t seed = seed_flag.value_or(sc.seed);

    json rows = json::array();
    for (size_t i = 0; i < sc.frequencies.size(); ++i) {
        double freq = sc.frequencies[i];
        double delta = 0.0;
        check(pdc_profile_delta(sc.profile.data(), sc.profile.size(), freq, &delta),
              "frequency lookup");
        sc.detector.delta_q = delta;

        auto sweep = run_sweep(sc, pdc_derive_seed(seed, 1000 + i));
        Table table;
        build_table(sweep, &table);
        pdc_table_info info{};
        check(pdc_table_get_info(table.handle, &info), "table info");
        ErrorReport rep = evaluate_table(sc, table, false, pdc_derive_seed(seed, 2000 + i));

        rows.push_back({{"freq", freq},
                        {"delta_hat", info.delta_hat_deg},
                        {"max_abs_err", rep.max_abs_err}});
        std::printf("%.3f GHz: delta_hat %.3f deg, max |err| %.4f deg\n", freq,
                    info.delta_hat_deg, rep.max_abs_err);
    }
    write_file_atomic(out_path, rows.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phase detector cell toolkit: sweep simulation, calibration, evaluation"};
    app.require_subcommand(1);

    std::string config_path, out_path, sweep_path, table_path;
    std::optional<uint64_t> seed_flag;
    bool fixed_path = false;
    double lr_min = 50.0, lr_max = 178.0, lr_step = 1.0;

    CLI::App* sim = app.add_subcommand("simulate-sweep", "synthesize a calibration sweep CSV");
    sim->add_option("--config", config_path, "scenario config JSON")->required();
    sim->add_option("--out", out_path, "output CSV path")->required();
    sim->add_option("--seed", seed_flag, "override the config seed");

    CLI::App* cal = app.add_subcommand("calibrate", "build a table from a sweep CSV");
    cal->add_option("sweep", sweep_path, "input sweep CSV")->required();
    cal->add_option("--out", out_path, "output base path (.json and .pdt)")->required();

    CLI::App* eva = app.add_subcommand("evaluate", "full-circle error report for a table");
    eva->add_option("table", table_path, "table file (.json or .pdt)")->required();
    eva->add_option("--config", config_path, "scenario config JSON")->required();
    eva->add_option("--out", out_path, "output base path (.json and .csv)")->required();
    eva->add_flag("--fixed", fixed_path, "use the integer estimator path");
    eva->add_option("--seed", seed_flag, "override the config seed");

    CLI::App* fig = app.add_subcommand("fig6", "max error and admissible deviation vs LR");
    fig->add_option("--lr-min", lr_min, "range start, degrees");
    fig->add_option("--lr-max", lr_max, "range end, degrees");
    fig->add_option("--step", lr_step, "grid step, degrees");
    fig->add_option("--out", out_path, "output CSV path")->required();

    CLI::App* freq = app.add_subcommand("freq-study", "calibrate and evaluate per frequency");
    freq->add_option("--config", config_path, "config with frequency_profile and frequencies")
        ->required();
    freq->add_option("--out", out_path, "output JSON path")->required();
    freq->add_option("--seed", seed_flag, "override the config seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) cmd_simulate_sweep(config_path, out_path, seed_flag);
        if (cal->parsed()) cmd_calibrate(sweep_path, out_path);
        if (eva->parsed()) cmd_evaluate(table_path, config_path, out_path, fixed_path, seed_flag);
        if (fig->parsed()) cmd_fig6(lr_min, lr_max, lr_step, out_path);
        if (freq->parsed()) cmd_freq_study(config_path, out_path, seed_flag);
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.message.c_str());
        return e.exit_code;
    }
    return 0;
}

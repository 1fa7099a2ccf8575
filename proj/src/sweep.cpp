#include "phasecell/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "phasecell/errors.hpp"

namespace phasecell {

std::vector<SweepRecord> simulate_sweep(const DetectorParams& params, double step_deg,
                                        std::optional<std::uint64_t> rng_seed) {
    params.validate();
    require(std::isfinite(step_deg) && step_deg > 0.0 && step_deg <= 90.0,
            "sweep step must be in (0, 90]");

    std::vector<SweepRecord> out;
    std::size_t n = static_cast<std::size_t>(std::ceil(360.0 / step_deg - 1e-9));
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        double phase = k * step_deg;
        std::optional<std::uint64_t> si, sq;
        if (rng_seed) {
            si = derive_seed(*rng_seed, 2 * k);
            sq = derive_seed(*rng_seed, 2 * k + 1);
        }
        double vi = branch_voltage(phase, {SwitchPath::path_0, SwitchPath::path_0}, params, si);
        double vq = branch_voltage(phase, {SwitchPath::path_90, SwitchPath::path_0}, params, sq);
        out.push_back({phase, vi, vq});
    }
    return out;
}

static const char kCsvHeader[] = "phase_deg,vdi_v,vdq_v";

std::string sweep_to_csv(const std::vector<SweepRecord>& records) {
    std::string out(kCsvHeader);
    out.push_back('\n');
    char line[128];
    for (const SweepRecord& r : records) {
        std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g\n", r.phase_deg, r.vdi_v, r.vdq_v);
        out += line;
    }
    return out;
}

namespace {

// Parse one double, consuming the whole field.
bool parse_field(const std::string& field, double* out) {
    if (field.empty()) return false;
    char* end = nullptr;
    *out = std::strtod(field.c_str(), &end);
    return end == field.c_str() + field.size() && std::isfinite(*out);
}

}  // namespace

std::vector<SweepRecord> sweep_from_csv(const std::string& text) {
    std::vector<SweepRecord> records;
    std::size_t pos = 0, line_no = 0;
    bool saw_header = false;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos
                                                                     : eol - pos);
        pos = eol == std::string::npos ? text.size() : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!saw_header) {
            if (line != kCsvHeader)
                fail(ErrorKind::format, "sweep CSV line 1: expected header \"" +
                                            std::string(kCsvHeader) + "\"");
            saw_header = true;
            continue;
        }
        std::size_t c1 = line.find(',');
        std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        SweepRecord rec;
        if (c1 == std::string::npos || c2 == std::string::npos ||
            line.find(',', c2 + 1) != std::string::npos ||
            !parse_field(line.substr(0, c1), &rec.phase_deg) ||
            !parse_field(line.substr(c1 + 1, c2 - c1 - 1), &rec.vdi_v) ||
            !parse_field(line.substr(c2 + 1), &rec.vdq_v)) {
            fail(ErrorKind::format,
                 "sweep CSV line " + std::to_string(line_no) + ": malformed record");
        }
        records.push_back(rec);
    }
    if (!saw_header) fail(ErrorKind::format, "sweep CSV: empty input");
    return records;
}

}  // namespace phasecell

#include <string>

#include "json.hpp"
#include "phasecell/calibration.hpp"
#include "phasecell/errors.hpp"

namespace phasecell {

namespace {

using nlohmann::json;

const char* curve_name(Curve c) { return c == Curve::in_phase ? "InPhase" : "Quadrature"; }
const char* sign_name(SlopeSign s) { return s == SlopeSign::plus ? "Plus" : "Minus"; }

Curve curve_of(const std::string& s) {
    if (s == "InPhase") return Curve::in_phase;
    if (s == "Quadrature") return Curve::quadrature;
    fail(ErrorKind::format, "unknown curve \"" + s + "\"");
}

SlopeSign sign_of(const std::string& s) {
    if (s == "Plus") return SlopeSign::plus;
    if (s == "Minus") return SlopeSign::minus;
    fail(ErrorKind::format, "unknown slope_sign \"" + s + "\"");
}

}  // namespace

std::string table_to_json(const CalibrationTable& table) {
    json sections = json::array();
    for (const Section& s : table.sections) {
        sections.push_back({
            {"curve", curve_name(s.curve)},
            {"slope_sign", sign_name(s.slope_sign)},
            {"center", s.center_deg},
            {"fit",
             {{"slope", s.fit.slope}, {"intercept", s.fit.intercept}, {"max_err", s.fit.max_err}}},
            {"domain", {s.domain_lo, s.domain_hi}},
            {"v_bounds", {s.v_lo, s.v_hi}},
        });
    }
    json j{
        {"norm_i", {{"gain", table.norm_i.gain}, {"offset", table.norm_i.offset}}},
        {"norm_q", {{"gain", table.norm_q.gain}, {"offset", table.norm_q.offset}}},
        {"delta_hat", table.delta_hat},
        {"sections", sections},
    };
    return j.dump(2) + "\n";
}

CalibrationTable table_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(ErrorKind::format, std::string("table JSON: ") + e.what());
    }
    CalibrationTable t;
    try {
        t.norm_i = {j.at("norm_i").at("gain").get<double>(),
                    j.at("norm_i").at("offset").get<double>()};
        t.norm_q = {j.at("norm_q").at("gain").get<double>(),
                    j.at("norm_q").at("offset").get<double>()};
        t.delta_hat = j.at("delta_hat").get<double>();
        const json& sections = j.at("sections");
        if (!sections.is_array() || sections.size() != 4)
            fail(ErrorKind::format, "table JSON: sections must be an array of 4");
        for (int i = 0; i < 4; ++i) {
            const json& js = sections[i];
            Section& s = t.sections[i];
            s.curve = curve_of(js.at("curve").get<std::string>());
            s.slope_sign = sign_of(js.at("slope_sign").get<std::string>());
            s.center_deg = js.at("center").get<double>();
            s.fit = {js.at("fit").at("slope").get<double>(),
                     js.at("fit").at("intercept").get<double>(),
                     js.at("fit").at("max_err").get<double>()};
            s.domain_lo = js.at("domain").at(0).get<double>();
            s.domain_hi = js.at("domain").at(1).get<double>();
            s.v_lo = js.at("v_bounds").at(0).get<double>();
            s.v_hi = js.at("v_bounds").at(1).get<double>();
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::format, std::string("table JSON: ") + e.what());
    }
    t.validate();
    return t;
}

}  // namespace phasecell

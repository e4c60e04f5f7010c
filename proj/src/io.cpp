#include "etmc/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace etmc {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

json report_to_json(const CertificationReport& rep) {
    json bounds = json::array();
    for (const auto& sb : rep.tf_state_bounds) bounds.push_back({{"X", sb.X}, {"bound", sb.bound}});
    const BstarDetails& bd = rep.bstar_details;
    return json{{"D", rep.D},
                {"b0", rep.b0},
                {"bstar", rep.bstar},
                {"bstar_details",
                 {{"P1", bd.P1},
                  {"P2", bd.P2},
                  {"P3", bd.P3},
                  {"P4", bd.P4},
                  {"F_at_b0", bd.f_at_b0},
                  {"slope_at_b0", bd.slope_at_b0},
                  {"increasing_at_b0", bd.increasing_at_b0}}},
                {"rho_p1e", rep.rho_p1e},
                {"spectral_feasible", rep.spectral_feasible},
                {"q_at_D", rep.q_at_D},
                {"q_feasible", rep.q_feasible},
                {"q_margin", rep.q_margin},
                {"c0_inf", rep.c0_inf},
                {"c0_unbounded", rep.c0_unbounded},
                {"c1", rep.c1},
                {"tf_inf_bound", rep.tf_inf_bound},
                {"tf_state_bounds", bounds},
                {"certified", rep.certified()},
                {"notes", rep.notes}};
}

std::string report_summary(const CertificationReport& rep) {
    std::ostringstream out;
    out << "D = " << rep.D << "\n";
    out << "rho(P1E) = " << format_double(rep.rho_p1e) << (rep.spectral_feasible ? "  (a^2 rho < 1)" : "  (a^2 rho >= 1)")
        << "\n";
    out << "B0 = " << format_double(rep.b0) << "  B* = " << format_double(rep.bstar) << "\n";
    if (!rep.q_at_D.empty()) {
        out << "Q(D) =";
        for (double q : rep.q_at_D) out << " " << format_double(q);
        out << (rep.q_feasible ? "  (negative, margin " : "  (not negative, margin ") << format_double(rep.q_margin)
            << ")\n";
    }
    if (rep.q_feasible) {
        out << "C0_inf = " << rep.c0_inf << (rep.c0_unbounded ? " (cap reached)" : "") << "  C1 = "
            << format_double(rep.c1) << "\n";
        out << "transmission fraction bound = " << format_double(rep.tf_inf_bound) << "\n";
    }
    for (const auto& n : rep.notes) out << "note: " << n << "\n";
    out << (rep.certified() ? "certified" : "NOT certified") << "\n";
    return out.str();
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& hash,
                     const std::vector<std::string>& columns)
    : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << "# config_hash=" << hash << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_double(v)); }
CsvWriter& CsvWriter::cell(long v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(const std::string& v) {
    if (!first_) out_ << ",";
    out_ << v;
    first_ = false;
    return *this;
}

void CsvWriter::end_row() {
    out_ << "\n";
    first_ = true;
}

std::string csv_config_hash(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    const std::string tag = "# config_hash=";
    if (line.rfind(tag, 0) != 0) return {};
    return line.substr(tag.size());
}

void claim_output_dir(const std::filesystem::path& dir, const std::string& hash) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path manifest = dir / "manifest.json";
    if (fs::exists(manifest)) {
        std::ifstream in(manifest);
        const json doc = json::parse(in, nullptr, false);
        const std::string found = doc.is_object() ? doc.value("config_hash", "") : "";
        if (found != hash)
            throw ConfigError("output directory " + dir.string() + " holds results for config " + found +
                              "; refusing to mix with " + hash);
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".csv") continue;
        const std::string found = csv_config_hash(entry.path());
        if (found != hash)
            throw ConfigError("output file " + entry.path().string() + " belongs to config " +
                              (found.empty() ? std::string("<untagged>") : found) + "; refusing to mix with " + hash);
    }
}

void write_manifest(const std::filesystem::path& dir, const RunConfig& cfg, const json& extra) {
    json doc{{"config_hash", config_hash(cfg)}, {"config", to_json(cfg)}};
    for (const auto& [k, v] : extra.items()) doc[k] = v;
    std::ofstream out(dir / "manifest.json");
    out << doc.dump(2) << "\n";
}

}  // namespace etmc

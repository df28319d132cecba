#include "dispref/eval/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dispref/core/image_io.hpp"

namespace dispref {
namespace {

constexpr const char* kSeeNote =
    "# SEE: mean over edge pixels (valid GT whose 5x5 GT range > 2 px) of min over the 5x5 GT patch of |pred - gt|\n";

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void csv_row(std::ostream& out, const char* name, const MetricReport& r) {
    out << name;
    for (double th : {2.0, 3.0, 4.0, 5.0}) {
        auto it = r.bad.find(th);
        out << ',' << (it == r.bad.end() ? std::string() : num(it->second));
    }
    out << ',' << num(r.epe) << ',' << (r.see ? num(*r.see) : std::string()) << ',' << r.valid_count << ','
        << r.edge_count << '\n';
}

}  // namespace

ComparisonReport compare_report(const DisparityMap& raw, const DisparityMap& refined, const DisparityMap& gt) {
    ComparisonReport rep;
    rep.raw = evaluate(fill_invalid_background(raw), gt);
    rep.refined = evaluate(fill_invalid_background(refined), gt);
    rep.delta.epe = rep.refined.epe - rep.raw.epe;
    for (const auto& [th, v] : rep.refined.bad) rep.delta.bad[th] = v - rep.raw.bad.at(th);
    if (rep.raw.see && rep.refined.see) rep.delta.see = *rep.refined.see - *rep.raw.see;
    rep.delta.valid_count = rep.refined.valid_count;
    rep.delta.edge_count = rep.refined.edge_count;
    return rep;
}

std::string to_csv(const ComparisonReport& report) {
    std::ostringstream out;
    out << kSeeNote << "row,bad2,bad3,bad4,bad5,EPE,SEE,valid_px,edge_px\n";
    csv_row(out, "raw", report.raw);
    csv_row(out, "refined", report.refined);
    csv_row(out, "delta", report.delta);
    return out.str();
}

std::string to_text(const ComparisonReport& report) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-8s %8s %8s %8s %8s %8s %8s\n", "", "bad2", "bad3", "bad4", "bad5", "EPE", "SEE");
    out << line;
    auto row = [&](const char* name, const MetricReport& r) {
        std::snprintf(line, sizeof line, "%-8s %8.2f %8.2f %8.2f %8.2f %8.3f ", name, r.bad.at(2.0), r.bad.at(3.0),
                      r.bad.at(4.0), r.bad.at(5.0), r.epe);
        out << line;
        if (r.see) {
            std::snprintf(line, sizeof line, "%8.3f\n", *r.see);
            out << line;
        } else {
            out << "       -\n";
        }
    };
    row("raw", report.raw);
    row("refined", report.refined);
    row("delta", report.delta);
    out << "valid pixels: " << report.refined.valid_count << ", edge pixels: " << report.refined.edge_count << '\n';
    return out.str();
}

void write_report_csv(const std::filesystem::path& path, const ComparisonReport& report) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_csv(report);
}

}  // namespace dispref

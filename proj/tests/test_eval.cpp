#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dispref/eval/metrics.hpp"
#include "dispref/eval/pointcloud.hpp"
#include "dispref/eval/report.hpp"
#include "oracles.hpp"

using namespace dispref;
namespace fs = std::filesystem;

namespace {

DisparityMap random_map(std::mt19937_64& rng, int w, int h, double hole_rate, bool steps) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DisparityMap d(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (u(rng) < hole_rate) continue;
            d.at(x, y) = steps ? std::floor(u(rng) * 4.0) * 3.0 + u(rng) * 0.5 : u(rng) * 20.0;
        }
    return d;
}

DisparityMap row(std::initializer_list<double> v) {
    DisparityMap d(static_cast<int>(v.size()), 1);
    int i = 0;
    for (double x : v) d.at(i++, 0) = x;
    return d;
}

fs::path temp_dir() {
    const fs::path d = fs::temp_directory_path() / "dispref_test_eval";
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("EPE and bad on a hand example") {
    const DisparityMap pred = row({1, 2, 3}), gt = row({1, 2, 5});
    CHECK(epe(pred, gt) == doctest::Approx(2.0 / 3.0));
    CHECK(bad(pred, gt, 1.0) == doctest::Approx(100.0 / 3.0));
    CHECK(bad(pred, gt, 2.0) == 0.0);  // strictly greater
    CHECK(epe(gt, gt) == 0.0);
}

TEST_CASE("metrics skip invalid ground truth and reject holes in predictions") {
    DisparityMap gt = row({1, 2, 5});
    gt.invalidate(2, 0);
    CHECK(epe(row({1, 3, 100}), gt) == 0.5);
    DisparityMap pred = row({1, 2, 3});
    pred.invalidate(0, 0);
    CHECK_THROWS_AS(epe(pred, row({1, 2, 3})), std::domain_error);
    CHECK_THROWS_AS(epe(row({1, 2}), row({1, 2, 3})), std::domain_error);
    CHECK_THROWS_AS(epe(row({1}), DisparityMap(1, 1)), std::domain_error);
}

TEST_CASE("metrics equal the double-loop oracles on random maps") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const int w = 5 + trial % 11, h = 4 + trial % 7;
        const DisparityMap gt = random_map(rng, w, h, 0.15, trial % 2 == 0);
        const DisparityMap pred = random_map(rng, w, h, 0.0, false);
        CHECK(std::abs(epe(pred, gt) - oracle::epe(pred, gt)) <= 1e-9);
        for (double th : {1.0, 2.0, 3.0, 4.0, 5.0}) CHECK(bad(pred, gt, th) == oracle::bad(pred, gt, th));
        const auto s = see(pred, gt);
        const double o = oracle::see(pred, gt);
        CHECK(s.has_value() == !std::isnan(o));
        if (s) CHECK(std::abs(s->value - o) <= 1e-9);
    }
}

TEST_CASE("SEE takes the patch minimum") {
    // Center pred 10 against GT patch values {2, 10.4, 12}: contribution 0.4.
    DisparityMap gt(5, 5);
    gt.at(0, 0) = 2.0;
    gt.at(2, 2) = 10.4;
    gt.at(4, 4) = 12.0;
    DisparityMap pred(5, 5, 10.0);
    const auto s = see(pred, gt);
    REQUIRE(s.has_value());
    // (4,4) only sees {10.4, 12}: range 1.6 is not an edge.
    CHECK(s->edge_count == 2);
    // (0,0): min |10 - {2, 10.4}| = 0.4; (2,2): min |10 - {2, 10.4, 12}| = 0.4
    CHECK(s->value == doctest::Approx(0.4));
    const DisparityMap dense = fill_invalid_background(gt);
    REQUIRE(see(dense, dense).has_value());
    CHECK(see(dense, dense)->value == 0.0);
}

TEST_CASE("SEE is absent without edges") {
    const DisparityMap flat(6, 6, 3.0);
    CHECK_FALSE(see(flat, flat).has_value());
    CHECK_FALSE(evaluate(flat, flat).see.has_value());
    CHECK_THROWS_AS(see(flat, flat, 4), std::domain_error);
}

TEST_CASE("metric properties") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const DisparityMap gt = random_map(rng, 12, 9, 0.1, true);
        const DisparityMap pred = random_map(rng, 12, 9, 0.0, true);
        double prev = 100.0;
        for (double th = 0.0; th <= 6.0; th += 0.25) {
            const double b = bad(pred, gt, th);
            CHECK(b <= prev);
            CHECK(b >= 0.0);
            prev = b;
        }
        // SEE never exceeds the plain error on the edge pixels.
        const auto s = see(pred, gt);
        if (s) {
            double acc = 0;
            int n = 0;
            for (int y = 0; y < 9; ++y)
                for (int x = 0; x < 12; ++x) {
                    if (!gt.valid(x, y)) continue;
                    double lo = 1e9, hi = -1e9;
                    for (int v = std::max(0, y - 2); v <= std::min(8, y + 2); ++v)
                        for (int u = std::max(0, x - 2); u <= std::min(11, x + 2); ++u)
                            if (gt.valid(u, v)) {
                                lo = std::min(lo, gt.at(u, v));
                                hi = std::max(hi, gt.at(u, v));
                            }
                    if (hi - lo > 2.0) {
                        acc += std::abs(pred.at(x, y) - gt.at(x, y));
                        ++n;
                    }
                }
            CHECK(s->value <= acc / n + 1e-12);
        }
        // Traversal order does not matter: mirrored maps score the same.
        DisparityMap mg(12, 9), mp(12, 9);
        for (int y = 0; y < 9; ++y)
            for (int x = 0; x < 12; ++x) {
                mg.at(11 - x, 8 - y) = gt.at(x, y);
                mp.at(11 - x, 8 - y) = pred.at(x, y);
            }
        CHECK(epe(mp, mg) == doctest::Approx(epe(pred, gt)).epsilon(1e-12));
        CHECK(bad(mp, mg, 3.0) == bad(pred, gt, 3.0));
    }
    // epe = 0 iff every bad(th) is 0
    const DisparityMap gt = random_map(rng, 8, 8, 0.0, false);
    DisparityMap nudged = gt;
    nudged.at(3, 3) += 1e-3;
    CHECK(epe(nudged, gt) > 0.0);
    CHECK(bad(nudged, gt, 1e-4) > 0.0);
}

TEST_CASE("background fill for matcher holes") {
    DisparityMap d = row({5, -1, -1, 2, -1});
    d.invalidate(1, 0);
    d.invalidate(2, 0);
    d.invalidate(4, 0);
    const DisparityMap f = fill_invalid_background(d);
    CHECK(f.at(1, 0) == 2.0);
    CHECK(f.at(2, 0) == 2.0);
    CHECK(f.at(4, 0) == 2.0);
    CHECK(fill_invalid_background(DisparityMap(3, 1)).at(1, 0) == 0.0);
}

TEST_CASE("comparison report") {
    std::mt19937_64 rng(3);
    const DisparityMap gt = random_map(rng, 16, 12, 0.0, true);
    const DisparityMap raw = random_map(rng, 16, 12, 0.2, true);
    const ComparisonReport same = compare_report(raw, raw, gt);
    CHECK(same.delta.epe == 0.0);
    for (const auto& [th, v] : same.delta.bad) CHECK(v == 0.0);
    const ComparisonReport perfect = compare_report(raw, gt, gt);
    CHECK(perfect.refined.epe == 0.0);
    for (const auto& [th, v] : perfect.refined.bad) CHECK(v == 0.0);
    REQUIRE(perfect.refined.see.has_value());
    CHECK(*perfect.refined.see == 0.0);
    CHECK(perfect.delta.epe == -perfect.raw.epe);

    const std::string csv = to_csv(perfect);
    CHECK(csv.rfind("# SEE:", 0) == 0);
    CHECK(csv.find("row,bad2,bad3,bad4,bad5,EPE,SEE,valid_px,edge_px\n") != std::string::npos);
    CHECK(csv.find("\nrefined,0.000000,0.000000,0.000000,0.000000,0.000000,0.000000,") != std::string::npos);
    CHECK(to_text(perfect).find("refined") != std::string::npos);
    write_report_csv(temp_dir() / "r.csv", perfect);
    std::ifstream in(temp_dir() / "r.csv");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == csv);
}

TEST_CASE("point cloud geometry") {
    CameraModel cam{100.0, 0.5, 2.0, 1.5};
    DisparityMap d(5, 4, 10.0);
    d.invalidate(0, 0);
    d.at(1, 0) = 5e-4;  // below the export threshold
    const PixelGrid rgb(5, 4, 3, 0.5);
    const auto pts = disparity_to_points(d, rgb, cam);
    CHECK(pts.size() == 18);
    for (const auto& p : pts) CHECK(p.z == doctest::Approx(5.0));  // plane: equal depth
    CHECK(pts.back().x == doctest::Approx((4 - 2.0) * 5.0 / 100.0));
    CHECK(pts.back().y == doctest::Approx((3 - 1.5) * 5.0 / 100.0));
    CHECK(int(pts[0].r) == 128);

    DisparityMap twice = d;
    for (int y = 0; y < 4; ++y)
        for (int x = 2; x < 5; ++x) twice.at(x, y) *= 2.0;
    const auto pts2 = disparity_to_points(twice, rgb, cam);
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (pts[i].x > 0) CHECK(pts2[i].z == doctest::Approx(pts[i].z / 2.0));

    CHECK_THROWS_AS(disparity_to_points(d, rgb, CameraModel{0.0, 1.0, 0, 0}), std::domain_error);
    CHECK_THROWS_AS(disparity_to_points(d, PixelGrid(4, 4, 3), cam), std::domain_error);
}

TEST_CASE("PLY files, ascii and binary") {
    CameraModel cam{50.0, 1.0, 1.0, 1.0};
    DisparityMap d(3, 3, 2.0);
    d.invalidate(1, 1);
    PixelGrid gray(3, 3, 1, 1.0);
    const fs::path a = temp_dir() / "a.ply", b = temp_dir() / "b.ply";
    CHECK(export_pointcloud(d, gray, cam, a, PlyFormat::ascii) == 8);
    CHECK(export_pointcloud(d, gray, cam, b, PlyFormat::binary_little_endian) == 8);

    std::ifstream ia(a);
    std::string line, header;
    int vertex_lines = 0;
    bool body = false;
    while (std::getline(ia, line)) {
        if (body) ++vertex_lines;
        else header += line + "\n";
        if (line == "end_header") body = true;
    }
    CHECK(header.find("format ascii 1.0") != std::string::npos);
    CHECK(header.find("element vertex 8") != std::string::npos);
    CHECK(vertex_lines == 8);

    std::ifstream ib(b, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(ib)), std::istreambuf_iterator<char>());
    const auto end = content.find("end_header\n");
    REQUIRE(end != std::string::npos);
    CHECK(content.find("format binary_little_endian 1.0") != std::string::npos);
    CHECK(content.size() - (end + 11) == 8 * 15);  // 3 floats + 3 bytes per vertex
    float z = 0;
    std::memcpy(&z, content.data() + end + 11 + 8, 4);
    CHECK(z == doctest::Approx(25.0));
    CHECK(static_cast<unsigned char>(content[end + 11 + 12]) == 255);

    CHECK_THROWS_AS(export_pointcloud(d, gray, cam, temp_dir() / "no_dir" / "x.ply"), std::runtime_error);
}

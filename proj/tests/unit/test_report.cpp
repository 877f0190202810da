#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "pothole/report.hpp"
#include "survey.hpp"

using namespace pothole;
namespace fs = std::filesystem;

namespace {

PotholeRecord rec(std::string id, std::optional<double> area, std::optional<double> depth,
                  std::optional<std::string> reported = std::nullopt, std::optional<std::string> repaired = std::nullopt) {
    PotholeRecord r;
    r.id = std::move(id);
    r.area_m2 = area;
    r.depth_mm = depth;
    if (reported) r.reported = Date::parse(*reported);
    if (repaired) r.repaired = Date::parse(*repaired);
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST(Bins, StatedRanges) {
    EXPECT_EQ(area_bin(10), SizeBin::Medium);
    EXPECT_EQ(area_bin(14), SizeBin::Large);
    EXPECT_EQ(area_bin(7.9), SizeBin::Small);
    EXPECT_EQ(area_bin(8), SizeBin::Medium);
    EXPECT_EQ(area_bin(13.99), SizeBin::Medium);
    EXPECT_EQ(area_bin(0), SizeBin::Small);
    EXPECT_EQ(depth_bin(45), SizeBin::Small);
    EXPECT_EQ(depth_bin(50), SizeBin::Small);
    EXPECT_EQ(depth_bin(50.5), SizeBin::Medium);
    EXPECT_EQ(depth_bin(75), SizeBin::Medium);
    EXPECT_EQ(depth_bin(99.9), SizeBin::Medium);
    EXPECT_EQ(depth_bin(100), SizeBin::Large);
    EXPECT_THROW((void)area_bin(-0.1), ValidationError);
    EXPECT_THROW((void)depth_bin(-1), ValidationError);
}

TEST(Bins, IntegerLabelsMatchPaperRanges) {
    for (int d = 0; d <= 200; ++d) {
        const SizeBin want = d <= 50 ? SizeBin::Small : (d <= 99 ? SizeBin::Medium : SizeBin::Large);
        EXPECT_EQ(depth_bin(d), want) << d;
    }
    for (int a = 0; a <= 40; ++a) {
        const SizeBin want = a < 8 ? SizeBin::Small : (a <= 13 ? SizeBin::Medium : SizeBin::Large);
        EXPECT_EQ(area_bin(a), want) << a;
    }
}

TEST(DaysToRepair, Examples) {
    EXPECT_EQ(days_to_repair(rec("a", {}, {}, "2015-06-01", "2015-06-24")), 23);
    EXPECT_EQ(days_to_repair(rec("a", {}, {}, "2015-06-01", "2015-06-01")), 0);
    EXPECT_EQ(days_to_repair(rec("a", {}, {}, "2015-06-01")), std::nullopt);
}

TEST(PriorityScore, Examples) {
    EXPECT_EQ(priority_score(rec("a", 20, 120)), 8);
    EXPECT_EQ(priority_score(rec("a", 1, 1)), 0);
    EXPECT_EQ(priority_score(rec("a", 10, 75)), 4);
    EXPECT_EQ(priority_score(rec("a", 10, std::nullopt)), std::nullopt);
}

TEST(PriorityScore, Monotone) {
    const double areas[] = {1, 10, 20};
    const double depths[] = {10, 75, 150};
    for (int a = 0; a < 3; ++a) {
        for (int d = 0; d < 3; ++d) {
            const int s = *priority_score(rec("x", areas[a], depths[d]));
            if (a < 2) {
                EXPECT_GE(*priority_score(rec("x", areas[a + 1], depths[d])), s);
            }
            if (d < 2) {
                EXPECT_GE(*priority_score(rec("x", areas[a], depths[d + 1])), s);
            }
        }
    }
}

TEST(Aggregate, EmptyCatalog) {
    const ReportBundle b = aggregate_report(SurveyCatalog{});
    EXPECT_EQ(b.sla_fraction, 1.0);
    EXPECT_EQ(b.matrix_total(), 0);
    EXPECT_TRUE(b.priority_queue.empty());
}

TEST(Aggregate, SingleMediumRecord) {
    SurveyCatalog cat;
    cat.add(rec("P1", 10, 75));
    const ReportBundle b = aggregate_report(cat);
    EXPECT_EQ(b.category_matrix[1][1], 1);
    EXPECT_EQ(b.matrix_total(), 1);
}

TEST(Aggregate, SlaFraction) {
    SurveyCatalog cat;
    cat.add(rec("a", 1, 1, "2015-06-01", "2015-06-24"));
    cat.add(rec("b", 1, 1, "2015-06-01", "2015-06-02"));
    cat.add(rec("c", 1, 1, "2015-06-01"));
    EXPECT_EQ(aggregate_report(cat, 23).sla_fraction, 1.0);
    EXPECT_EQ(aggregate_report(cat, 22).sla_fraction, 0.5);
    cat.add(rec("d", 1, 1, "2015-06-01", "2015-07-30"));
    const auto b = aggregate_report(cat);
    EXPECT_EQ(b.repaired_count, 3);
    EXPECT_EQ(b.within_sla, 2);
    EXPECT_THROW((void)aggregate_report(cat, -1), ValidationError);
}

TEST(Aggregate, HistogramTotalsAndOrdering) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 1);
    SurveyCatalog cat;
    int with_area = 0, with_depth = 0, with_both = 0;
    for (int i = 0; i < 200; ++i) {
        std::optional<double> a, d;
        std::optional<std::string> rep;
        if (u(rng) < 0.8) a = std::round(u(rng) * 25);
        if (u(rng) < 0.8) d = std::round(u(rng) * 150);
        if (u(rng) < 0.8) rep = fmt::format("2015-0{}-1{}", 1 + i % 9, i % 10);
        with_area += a.has_value();
        with_depth += d.has_value();
        with_both += a && d;
        cat.add(rec(fmt::format("id{:03}", (i * 37) % 200), a, d, rep));
    }
    const ReportBundle b = aggregate_report(cat);
    int ta = 0, td = 0;
    for (auto [_, n] : b.area_histogram) ta += n;
    for (auto [_, n] : b.depth_histogram) td += n;
    EXPECT_EQ(ta, with_area);
    EXPECT_EQ(td, with_depth);
    EXPECT_EQ(b.matrix_total(), with_both);

    ASSERT_EQ(b.priority_queue.size(), 200u);
    for (std::size_t i = 0; i + 1 < b.priority_queue.size(); ++i) {
        EXPECT_TRUE(priority_before(b.priority_queue[i], b.priority_queue[i + 1])) << i;
        EXPECT_FALSE(priority_before(b.priority_queue[i + 1], b.priority_queue[i])) << i;
    }
    auto again = b.priority_queue;
    std::reverse(again.begin(), again.end());
    std::sort(again.begin(), again.end(), priority_before);
    EXPECT_EQ(again, b.priority_queue);
}

TEST(Aggregate, WardSurveyShape) {
    const ReportBundle b = aggregate_report(survey::ward_survey());
    int max_cell = 0;
    for (const auto& row : b.category_matrix)
        for (int v : row) max_cell = std::max(max_cell, v);
    EXPECT_EQ(b.category_matrix[1][1], max_cell);
    int ties = 0;
    for (const auto& row : b.category_matrix)
        for (int v : row) ties += v == max_cell;
    EXPECT_EQ(ties, 1);
    EXPECT_EQ(b.category_matrix[2][0], 0);
    EXPECT_EQ(b.sla_fraction, 1.0);
}

TEST(ReportFiles, Layout) {
    SurveyCatalog cat;
    cat.add(rec("B", 10, 75, "2015-06-01", "2015-06-03"));
    cat.add(rec("A", 20, 120, "2015-06-05"));
    cat.add(rec("C,x", {}, 40));
    const fs::path dir = fs::temp_directory_path() / "pothole_report_test";
    fs::remove_all(dir);
    write_report_files(aggregate_report(cat), dir);
    EXPECT_EQ(slurp(dir / "area_hist.csv"), "bin,count\nSmall,0\nMedium,1\nLarge,1\n");
    EXPECT_EQ(slurp(dir / "depth_hist.csv"), "bin,count\nSmall,1\nMedium,1\nLarge,1\n");
    EXPECT_EQ(slurp(dir / "days_hist.csv"), "day,count\n2,1\n");
    EXPECT_EQ(slurp(dir / "matrix.csv"),
              "area_bin/depth_bin,Small,Medium,Large\nSmall,0,0,0\nMedium,0,1,0\nLarge,0,0,1\n");
    EXPECT_EQ(slurp(dir / "priority.csv"),
              "rank,id,score,area_bin,depth_bin,reported\n"
              "1,A,8,Large,Large,2015-06-05\n"
              "2,B,4,Medium,Medium,2015-06-01\n"
              "3,\"C,x\",unscorable,,Small,\n");
    const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
    EXPECT_EQ(j["sla_fraction"], 1.0);
    EXPECT_EQ(j["priority_queue"][0]["id"], "A");
}

TEST(ReportFiles, EmptyCatalogGivesHeaders) {
    const fs::path dir = fs::temp_directory_path() / "pothole_report_empty";
    fs::remove_all(dir);
    write_report_files(aggregate_report(SurveyCatalog{}), dir);
    EXPECT_EQ(slurp(dir / "days_hist.csv"), "day,count\n");
    EXPECT_EQ(slurp(dir / "priority.csv"), "rank,id,score,area_bin,depth_bin,reported\n");
    EXPECT_EQ(slurp(dir / "area_hist.csv"), "bin,count\nSmall,0\nMedium,0\nLarge,0\n");
}

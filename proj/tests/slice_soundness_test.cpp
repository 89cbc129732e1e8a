// Executes original functions and their slices under CPython on random inputs
// and checks that the target line sees identical values for every name it
// reads, at every hit.

#include "fixtures.hpp"

#include "weaver/slicer.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace weaver;
namespace fs = std::filesystem;

namespace {

std::string run_python(const std::string& job_path) {
    std::string cmd = "python3 " + std::string(WEAVER_SUPPORT_DIR) + "/slice_check.py " + job_path;
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) return out;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    pclose(pipe);
    return out;
}

bool python_available() { return std::system("python3 -c 'import sys' > /dev/null 2>&1") == 0; }

class SliceSoundness : public ::testing::TestWithParam<std::string> {};

}  // namespace

TEST_P(SliceSoundness, TargetValuesMatchOriginal) {
    if (!python_available()) GTEST_SKIP() << "python3 not available";
    const std::string name = GetParam();
    const std::string original = weaver::testing::fixture_path("slicing/" + name + ".py");
    auto unit = parse_unit(weaver::testing::read_file(original), original);
    auto cfg = build_cfg(unit);
    auto cdg = build_cdg(cfg);

    fs::path dir = fs::path(WEAVER_TEST_TMP) / ("slices_" + name);
    fs::create_directories(dir);

    // One job per free function; methods need an instance and are skipped.
    std::map<std::string, nlohmann::json> jobs;
    int slices = 0;
    for (int line : unit.executable_lines) {
        auto region = cfg.region_of(line);
        int fn = cfg.regions[static_cast<std::size_t>(*region)].function;
        if (fn < 0 || !unit.functions[static_cast<std::size_t>(fn)].class_name.empty()) continue;
        const auto& fname = unit.functions[static_cast<std::size_t>(fn)].name;

        auto slice = backward_slice(unit, cfg, cdg, line);
        fs::path out = dir / ("line_" + std::to_string(line) + ".py");
        std::ofstream(out) << slice.rendered_text;
        ++slices;

        const auto& stmt = unit.statements[static_cast<std::size_t>(unit.first_line_index.at(line))];
        auto& job = jobs[fname];
        if (job.is_null()) {
            job = {{"original", original}, {"function", fname}, {"seed", 7}, {"runs", 60}, {"cases", nlohmann::json::array()}};
        }
        job["cases"].push_back({{"slice", fs::absolute(out).string()},
                                {"orig_line", line},
                                {"slice_line", slice.line_map.at(line)},
                                {"names", stmt.referenced}});
    }
    ASSERT_GT(slices, 0);

    int reached = 0;
    for (auto& [fname, job] : jobs) {
        fs::path job_path = dir / (fname + ".json");
        std::ofstream(job_path) << job.dump();
        auto raw = run_python(job_path.string());
        ASSERT_FALSE(raw.empty()) << "slice_check produced no output for " << fname;
        auto result = nlohmann::json::parse(raw);
        reached += result["reached"].get<int>();
        EXPECT_TRUE(result["mismatches"].empty()) << fname << ": " << result["mismatches"].dump(2);
    }
    EXPECT_GT(reached, 0);
}

INSTANTIATE_TEST_SUITE_P(Fixtures, SliceSoundness, ::testing::Values("fig1", "loops", "branches", "records"));

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "marsft/fixtures.hpp"

using namespace marsft;
namespace fs = std::filesystem;

namespace {

const fs::path kSource(MARSFT_SOURCE_DIR);

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("marsft_fix_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path copy_of(const fs::path& from, const std::string& name) {
    const auto to = scratch(name);
    fs::copy(from, to, fs::copy_options::recursive);
    return to;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = csv::read_file(e.path());
    return out;
}

fixtures::Status status_of(const fixtures::Report& r, const std::string& name) {
    for (const auto& e : r.entries)
        if (e.name == name) return e.status;
    ADD_FAILURE() << "no entry " << name;
    return fixtures::Status::Error;
}

}  // namespace

TEST(Fixtures, RepositoryCopyMatches) {
    ASSERT_TRUE(fs::exists(kSource / "tests" / "fixtures" / fixtures::kManifest));
    const auto dir = copy_of(kSource / "tests" / "fixtures", "repo");
    const auto rep = fixtures::regenerate_fixtures(dir, kSource / "presets");
    EXPECT_EQ(rep.entries.size(), fixtures::catalogue().size());
    for (const auto& e : rep.entries) EXPECT_EQ(e.status, fixtures::Status::Match) << e.name << " " << e.detail;
}

TEST(Fixtures, EmptyDirectoryIsPopulatedThenStable) {
    const auto dir = scratch("empty");
    const auto first = fixtures::regenerate_fixtures(dir, kSource / "presets");
    EXPECT_TRUE(first.ok()) << fixtures::format(first);
    for (const auto& e : first.entries) EXPECT_EQ(e.status, fixtures::Status::Created) << e.name;
    const auto files = snapshot(dir);
    EXPECT_EQ(files.size(), fixtures::catalogue().size() + 1);

    const auto second = fixtures::regenerate_fixtures(dir, kSource / "presets");
    for (const auto& e : second.entries) EXPECT_EQ(e.status, fixtures::Status::Match) << e.name;
    EXPECT_EQ(snapshot(dir), files);
    fixtures::regenerate_fixtures(dir, kSource / "presets");
    EXPECT_EQ(snapshot(dir), files);
}

TEST(Fixtures, PerturbedGainDriftsTheAffectedFixtures) {
    const auto presets = copy_of(kSource / "presets", "presets_kp");
    const auto dir = copy_of(kSource / "tests" / "fixtures", "kp");
    {
        auto text = csv::read_file(presets / "fig6b_100_100.cfg");
        const auto at = text.find("pll.kp = 800");
        ASSERT_NE(at, std::string::npos);
        text.replace(at, 12, "pll.kp = 880");
        csv::write_atomic(presets / "fig6b_100_100.cfg", text);
    }
    const auto rep = fixtures::regenerate_fixtures(dir, presets);
    EXPECT_FALSE(rep.ok());
    const auto drift = rep.drifted();
    for (const auto* n : {"fig6b_100_100_config", "fig6b_100_100_adev", "fig6b_100_100_psd"})
        EXPECT_NE(std::find(drift.begin(), drift.end(), n), drift.end()) << n;
    for (const auto* n : {"fig6b_120_80_adev", "fig6cd_grid", "fig7_3000km_config"})
        EXPECT_EQ(status_of(rep, n), fixtures::Status::Match) << n;
    EXPECT_NE(fixtures::format(rep).find("fig6b_100_100_adev: drift"), std::string::npos);
}

TEST(Fixtures, MissingPresetFlagged) {
    const auto presets = copy_of(kSource / "presets", "presets_missing");
    fs::remove(presets / "exp_260_280.cfg");
    const auto dir = copy_of(kSource / "tests" / "fixtures", "missing");
    const auto rep = fixtures::regenerate_fixtures(dir, presets);
    EXPECT_EQ(status_of(rep, "exp_260_280_adev"), fixtures::Status::MissingPreset);
    EXPECT_EQ(status_of(rep, "exp_260_280_config"), fixtures::Status::MissingPreset);
    EXPECT_EQ(status_of(rep, "fig6b_120_80_adev"), fixtures::Status::Match);
    EXPECT_FALSE(rep.ok());
}

TEST(Fixtures, TamperedFileFailsChecksum) {
    const auto dir = copy_of(kSource / "tests" / "fixtures", "tamper");
    {
        std::ofstream f(dir / "fig6b_120_80_adev.csv", std::ios::app);
        f << "\n";
    }
    const auto rep = fixtures::regenerate_fixtures(dir, kSource / "presets");
    EXPECT_EQ(status_of(rep, "fig6b_120_80_adev"), fixtures::Status::Drift);
}

TEST(Fixtures, ManifestFormat) {
    const auto dir = scratch("manifest");
    fixtures::write_manifest(dir, {{"a", "p", "0123456789abcdef", fixtures::Tolerance::Band50}});
    const auto m = fixtures::read_manifest(dir);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m[0].tolerance, fixtures::Tolerance::Band50);
    csv::write_atomic(dir / fixtures::kManifest, "a p x sloppy\n");
    EXPECT_THROW(fixtures::read_manifest(dir), csv::IoError);
}

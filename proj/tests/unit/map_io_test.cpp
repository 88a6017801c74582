#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sigseek/map_io.hpp"

namespace sigseek {
namespace {

MapSpec parse(const std::string& text, double pitch = 1.0) {
  std::istringstream in(text);
  return parse_text_map(in, pitch);
}

TEST(TextMap, TopRowIsLargestY) {
  const MapSpec m = parse("; comment\n#X.\n\nS..\n", 0.5);
  EXPECT_EQ(m.grid.width(), 3);
  EXPECT_EQ(m.grid.height(), 2);
  EXPECT_EQ(m.start, (GridCell{0, 0}));
  EXPECT_EQ(m.source, (Location{0.5, 0.5}));
  EXPECT_TRUE(m.grid.occupied({0, 1}));
  EXPECT_FALSE(m.grid.occupied({1, 1}));
  EXPECT_EQ(m.grid.pitch(), 0.5);
}

TEST(TextMap, Errors) {
  EXPECT_THROW(parse(""), std::invalid_argument);
  EXPECT_THROW(parse("S.\nX\n"), std::invalid_argument);
  EXPECT_THROW(parse("..\n.X\n"), std::invalid_argument);
  EXPECT_THROW(parse("S.\n..\n"), std::invalid_argument);
  EXPECT_THROW(parse("SS\n.X\n"), std::invalid_argument);
  EXPECT_THROW(parse("S?\n.X\n"), std::invalid_argument);
}

TEST(Pgm, AsciiValues) {
  std::istringstream in("P2\n# c\n3 2\n4\n0 4 2\n4 4 4\n");
  const OccupancyGrid g = parse_pgm(in, 1.0);
  EXPECT_EQ(g.width(), 3);
  EXPECT_EQ(g.p_occ({0, 1}), 1.0);
  EXPECT_EQ(g.p_occ({1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(g.p_occ({2, 1}), 0.5);
  EXPECT_EQ(g.p_occ({0, 0}), 0.0);
}

TEST(Pgm, BinaryMatchesAscii) {
  std::string bin = "P5 2 2 255\n";
  bin += std::string{static_cast<char>(0), static_cast<char>(255), static_cast<char>(255),
                     static_cast<char>(0)};
  std::istringstream in(bin);
  const OccupancyGrid g = parse_pgm(in, 0.25);
  EXPECT_EQ(g.p_occ({0, 1}), 1.0);
  EXPECT_EQ(g.p_occ({1, 1}), 0.0);
  EXPECT_EQ(g.p_occ({0, 0}), 0.0);
  EXPECT_EQ(g.p_occ({1, 0}), 1.0);
}

TEST(Pgm, Errors) {
  std::istringstream bad_magic("P6 1 1 255\n");
  EXPECT_THROW((void)parse_pgm(bad_magic, 1.0), std::invalid_argument);
  std::istringstream truncated("P2 2 2 4\n0 4 4\n");
  EXPECT_THROW((void)parse_pgm(truncated, 1.0), std::invalid_argument);
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("sigseek_map_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::filesystem::path write(const std::string& name, const std::string& body) {
    const auto p = dir_ / name;
    std::ofstream(p, std::ios::binary) << body;
    return p;
  }

  std::filesystem::path dir_;
};

TEST_F(TempDir, PgmWithSidecar) {
  const auto p = write("room.pgm", "P2 3 2 1\n1 1 0\n1 1 1\n");
  write("room.pgm.meta", "pitch = 0.5\nsource_col = 1\nsource_row = 0\nstart_col = 0\nstart_row = 1\n");
  const MapSpec m = load_map(p);
  EXPECT_EQ(m.name, "room");
  EXPECT_EQ(m.grid.pitch(), 0.5);
  EXPECT_EQ(m.source, (Location{0.5, 0.5}));
  EXPECT_EQ(m.start, (GridCell{0, 0}));
  EXPECT_TRUE(m.grid.occupied({2, 1}));
}

TEST_F(TempDir, PgmSidecarErrors) {
  const auto p = write("room.pgm", "P2 1 1 1\n1\n");
  EXPECT_THROW((void)load_map(p), std::invalid_argument);
  write("room.pgm.meta", "pitch = 1\nsource_col = x\n");
  EXPECT_THROW((void)load_map(p), std::invalid_argument);
  write("room.pgm.meta", "pitch = 1\nsource_col = 4\nsource_row = 0\nstart_col = 0\nstart_row = 0\n");
  EXPECT_THROW((void)load_map(p), std::invalid_argument);
}

TEST_F(TempDir, TextMapWithOptionalPitch) {
  const auto p = write("tiny.txt", "X.\n.S\n");
  EXPECT_EQ(load_map(p).grid.pitch(), 1.0);
  write("tiny.txt.meta", "pitch = 0.2\n");
  EXPECT_EQ(resolve_map(p.string()).grid.pitch(), 0.2);
  EXPECT_THROW((void)load_map(dir_ / "missing.txt"), std::invalid_argument);
}

TEST(BundledMaps, AllParse) {
  const auto names = bundled_map_names();
  EXPECT_EQ(names, (std::vector<std::string>{"map_a", "map_b", "open"}));
  for (const auto& name : names) {
    const MapSpec m = bundled_map(name);
    EXPECT_EQ(m.name, name);
    EXPECT_TRUE(m.grid.traversable(m.start));
    EXPECT_FALSE(m.grid.occupied(m.grid.cell_at(m.source)));
    EXPECT_FALSE(m.description.empty());
  }
  const MapSpec a = bundled_map("map_a"), b = bundled_map("map_b");
  EXPECT_EQ(a.grid.width(), b.grid.width());
  EXPECT_NE(a.source, b.source);
  EXPECT_THROW((void)bundled_map("nope"), std::invalid_argument);
  EXPECT_EQ(resolve_map("open").name, "open");
}

}  // namespace
}  // namespace sigseek

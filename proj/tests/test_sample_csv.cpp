#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "cbp/csv_io.hpp"
#include "cbp/errors.hpp"
#include "cbp/sample.hpp"
#include "test_util.hpp"

using namespace cbp;

TEST_CASE("frozen tree: derived columns and cumulative sums") {
  auto tree = test_util::load_tree();
  CHECK(tree.n() == 30);
  CHECK(tree.s_max() == 3);
  CHECK(tree.z0() == 1);
  auto sizes = tree.sizes();
  REQUIRE(sizes.size() == 31);
  CHECK(sizes.front() == 1);
  CHECK(sizes[29] == 167);
  CHECK(sizes.back() == 200);

  // column sums of the data table
  CHECK(tree.Delta(29) == 1266);
  CHECK(tree.Y(29) == 2080);
  CHECK(tree.Y(30) == 2280);
  CHECK(tree.Yk(29, 0) == 130);
  CHECK(tree.Yk(29, 1) == 350);
  CHECK(tree.Yk(29, 2) == 429);
  CHECK(tree.Yk(29, 3) == 357);

  auto phis = tree.phis();
  std::int64_t delta = 0;
  for (auto f : phis) delta += f;
  CHECK(delta == 1266);
}

TEST_CASE("projections agree with the full tree") {
  auto tree = test_util::load_tree();
  auto prog = project_progenitors(tree);
  auto sz = project_sizes(tree);
  CHECK(prog.n() == 30);
  CHECK(sz.n() == 30);
  CHECK(prog.z == tree.sizes());
  CHECK(prog.phi == tree.phis());
  CHECK(sz.z == tree.sizes());
  CHECK_NOTHROW(prog.validate());
  CHECK_NOTHROW(sz.validate());
  CHECK_NOTHROW(prog.validate_for(ControlKind::binomial, 3));
  CHECK_NOTHROW(sz.validate_for(ControlKind::binomial, 3));
}

TEST_CASE("prefix truncates consistently") {
  auto tree = test_util::load_tree();
  auto head = tree.prefix(5);
  CHECK(head.n() == 5);
  CHECK(head.z0() == 1);
  CHECK(head.sizes()[5] == tree.sizes()[5]);
  CHECK(head.Delta(4) == tree.Delta(4));
  CHECK_THROWS_AS(tree.prefix(0), SchemaError);
  CHECK_THROWS_AS(tree.prefix(31), SchemaError);
}

TEST_CASE("full-tree csv round-trips byte-exactly through read/write") {
  auto tree = test_util::load_tree();
  std::string path = test_util::tmp_dir() + "/tree_roundtrip.csv";
  write_full_tree_csv(path, tree);
  auto back = read_full_tree_csv(path);
  CHECK(back.z0() == tree.z0());
  CHECK(back.counts() == tree.counts());

  // ostream overload produces the same bytes as the file
  std::ostringstream buf;
  write_full_tree_csv(buf, tree);
  std::ifstream in(path);
  std::stringstream file_content;
  file_content << in.rdbuf();
  CHECK(buf.str() == file_content.str());
}

TEST_CASE("progenitor and sizes csvs round-trip; readers accept full files") {
  auto tree = test_util::load_tree();
  auto prog = project_progenitors(tree);
  auto sz = project_sizes(tree);

  std::string ppath = test_util::tmp_dir() + "/prog.csv";
  write_progenitor_csv(ppath, prog);
  auto prog2 = read_progenitor_csv(ppath);
  CHECK(prog2.z == prog.z);
  CHECK(prog2.phi == prog.phi);

  std::string spath = test_util::tmp_dir() + "/sizes.csv";
  write_sizes_csv(spath, sz);
  auto sz2 = read_sizes_csv(spath);
  CHECK(sz2.z == sz.z);

  // column-superset rule: a full tree file serves the thinner readers
  auto prog3 = read_progenitor_csv(test_util::data_path("simulated_tree.csv"));
  CHECK(prog3.phi == prog.phi);
  auto sz3 = read_sizes_csv(test_util::data_path("simulated_tree.csv"));
  CHECK(sz3.z == sz.z);
  // but a sizes-only file cannot feed the progenitor reader
  CHECK_THROWS_AS(read_progenitor_csv(spath), SchemaError);
}

TEST_CASE("metadata comment lines are written and skipped on read") {
  auto tree = test_util::load_tree();
  CsvMetadata meta;
  meta.add("generator", "unit-test");
  meta.add("seed", "99");
  std::string path = test_util::tmp_dir() + "/meta.csv";
  write_full_tree_csv(path, tree, meta);
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(first == "# generator=unit-test");
  CHECK_NOTHROW(read_full_tree_csv(path));
}

static void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

TEST_CASE("reader rejects inconsistent files") {
  std::string dir = test_util::tmp_dir();

  std::string bad1 = dir + "/bad_phi.csv";  // phi != sum of counts
  write_text(bad1, "n,Z,phi,Z0,Z1\n0,2,2,1,0\n1,0,,,\n");
  CHECK_THROWS_AS(read_full_tree_csv(bad1), SchemaError);

  std::string bad2 = dir + "/bad_z.csv";  // declared Z_1 != weighted count sum
  write_text(bad2, "n,Z,phi,Z0,Z1\n0,2,1,0,1\n1,3,,,\n");
  CHECK_THROWS_AS(read_full_tree_csv(bad2), SchemaError);

  std::string bad3 = dir + "/bad_order.csv";  // generation index gap
  write_text(bad3, "n,Z,phi,Z0,Z1\n0,2,1,0,1\n2,1,,,\n");
  CHECK_THROWS_AS(read_full_tree_csv(bad3), SchemaError);

  std::string bad4 = dir + "/bad_neg.csv";  // negative count
  write_text(bad4, "n,Z,phi,Z0,Z1\n0,2,1,-1,2\n1,2,,,\n");
  CHECK_THROWS_AS(read_full_tree_csv(bad4), SchemaError);

  std::string bad5 = dir + "/bad_header.csv";
  write_text(bad5, "a,b\n1,2\n");
  CHECK_THROWS_AS(read_full_tree_csv(bad5), SchemaError);

  CHECK_THROWS_AS(read_full_tree_csv(dir + "/does_not_exist.csv"), IoError);
}

TEST_CASE("sample validation rules") {
  ProgenitorSample p{{2, 3, 0}, {2, 0}};
  CHECK_NOTHROW(p.validate());  // phi_1 = 0 forces Z_2 = 0: consistent

  ProgenitorSample bad{{2, 3, 1}, {2, 0}};  // phi = 0 but next size > 0
  CHECK_THROWS_AS(bad.validate(), SchemaError);

  ProgenitorSample len{{2, 3}, {2, 1}};  // z must have phi.size()+1 entries
  CHECK_THROWS_AS(len.validate(), SchemaError);

  ProgenitorSample binom{{2, 9}, {3}};  // phi > z under binomial control
  CHECK_THROWS_AS(binom.validate_for(ControlKind::binomial, 3), SchemaError);
  ProgenitorSample grow{{2, 9}, {2}};  // z' = 9 > phi*s_max = 6
  CHECK_THROWS_AS(grow.validate_for(ControlKind::binomial, 3), SchemaError);
  ProgenitorSample ok{{2, 6}, {2}};
  CHECK_NOTHROW(ok.validate_for(ControlKind::binomial, 3));
  CHECK_NOTHROW(grow.validate_for(ControlKind::poisson, 5));  // 9 <= 2*5

  SizesSample s{{1, 3, 9}};
  CHECK_NOTHROW(s.validate());
  CHECK_NOTHROW(s.validate_for(ControlKind::binomial, 3));
  SizesSample jump{{1, 5}};  // 5 > 1*3 cannot happen under binomial control
  CHECK_THROWS_AS(jump.validate_for(ControlKind::binomial, 3), SchemaError);
  CHECK_NOTHROW(jump.validate_for(ControlKind::poisson, 3));
  SizesSample rise{{1, 0, 2}};  // resurrection after extinction
  CHECK_THROWS_AS(rise.validate(), SchemaError);
}

TEST_CASE("format_double is shortest round-trip") {
  for (double v : {0.1, 1.0 / 3.0, 1.5552825552825553, -166.26628220693743, 0.0, -0.0,
                   1e-300, 2280.0, 0.10268562401263823}) {
    std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(2280.0) == "2280");
}

TEST_CASE("csv line split/join") {
  auto fields = split_csv_line("a,,1.5");
  REQUIRE(fields.size() == 3);
  CHECK(fields[0] == "a");
  CHECK(fields[1].empty());
  CHECK(fields[2] == "1.5");
  CHECK(join_csv({"a", "", "1.5"}) == "a,,1.5");
  CHECK(split_csv_line("").size() == 1);
}

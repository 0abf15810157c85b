#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "epilab/experiment.hpp"

using namespace epilab;
namespace ex = epilab::experiment;
namespace fs = std::filesystem;
using ex::json;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("epilab_exp_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct Cli {
  int code = -1;
  std::string out, err;
};

Cli cli(const std::string& args, const std::string& tag) {
  const auto dir = scratch("cli_" + tag);
  const std::string cmd = std::string(EPILAB_CLI) + " " + args + " > " + (dir / "out").string() + " 2> " +
                          (dir / "err").string();
  const int status = std::system(cmd.c_str());
  Cli r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = io::read_file(dir / "out");
  r.err = io::read_file(dir / "err");
  return r;
}

fs::path write_config(const std::string& tag, const json& doc) {
  const auto p = scratch("cfg_" + tag) / "config.json";
  io::write_atomic(p, doc.dump(2));
  return p;
}

json strip_uniqueness(double width) {
  return json::parse(R"({
    "experiment": "uniqueness",
    "seed": 3,
    "domain": {"kind": "strip", "lo": 0, "hi": )" + io::format_number(width) + R"(},
    "nonlinearity": {"kind": "linear", "c": 1.0},
    "grid": {"box_lo": [-1, 0], "box_hi": [1, )" + io::format_number(width) + R"(], "h": 0.125},
    "uniqueness": {"restarts": 4}
  })");
}

std::string validation_message(const json& doc) {
  try {
    ex::parse_config(doc);
  } catch (const LabError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
    return e.what();
  }
  ADD_FAILURE() << "config accepted";
  return "";
}

}  // namespace

TEST(Config, ShippedConfigsValidate) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(EPILAB_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW(ex::parse_config(ex::load_config(e.path()), EPILAB_CONFIG_DIR)) << e.path();
    ++n;
  }
  EXPECT_GE(n, 8u);
}

TEST(Config, NonPositiveSpacingNamesTheField) {
  auto doc = strip_uniqueness(2.0);
  doc["grid"]["h"] = 0.0;
  EXPECT_NE(validation_message(doc).find("grid.h"), std::string::npos);
  doc["grid"]["h"] = -0.5;
  EXPECT_NE(validation_message(doc).find("grid.h"), std::string::npos);
}

TEST(Config, UnknownKeysAreErrors) {
  auto doc = strip_uniqueness(2.0);
  doc["tolerences"] = json::object();
  EXPECT_NE(validation_message(doc).find("unknown key tolerences"), std::string::npos);
  doc = strip_uniqueness(2.0);
  doc["uniqueness"]["restart"] = 3;
  EXPECT_NE(validation_message(doc).find("unknown key uniqueness.restart"), std::string::npos);
  doc = strip_uniqueness(2.0);
  doc["domain"]["width"] = 3;
  EXPECT_NE(validation_message(doc).find("domain.width"), std::string::npos);
}

TEST(Config, TypeAndRangeErrors) {
  auto doc = strip_uniqueness(2.0);
  doc["experiment"] = "plot";
  EXPECT_NE(validation_message(doc).find("experiment must be one of"), std::string::npos);
  doc = strip_uniqueness(2.0);
  doc["uniqueness"]["restarts"] = "many";
  EXPECT_NE(validation_message(doc).find("uniqueness.restarts must be an integer"), std::string::npos);
  doc = strip_uniqueness(2.0);
  doc["grid"]["h"] = 0.3;
  EXPECT_NE(validation_message(doc).find("must divide the box extent"), std::string::npos);
  doc = strip_uniqueness(2.0);
  doc["grid"]["box_lo"] = json::array({0});
  EXPECT_NE(validation_message(doc).find("grid.box_lo must have 2 entries"), std::string::npos);
  doc = strip_uniqueness(2.0);
  doc["nonlinearity"] = {{"kind", "constant"}, {"K", 1.0}};
  EXPECT_NE(validation_message(doc).find("f(0) = 0"), std::string::npos);
  doc = strip_uniqueness(2.0);
  doc.erase("domain");
  EXPECT_NE(validation_message(doc).find("domain is required"), std::string::npos);
}

TEST(Config, HashIgnoresKeyOrder) {
  const auto a = json::parse(R"({"experiment": "verify_examples", "seed": 1})");
  const auto b = json::parse(R"({"seed": 1, "experiment": "verify_examples"})");
  const auto c = json::parse(R"({"seed": 2, "experiment": "verify_examples"})");
  EXPECT_EQ(ex::parse_config(a).hash, ex::parse_config(b).hash);
  EXPECT_NE(ex::parse_config(a).hash, ex::parse_config(c).hash);
}

TEST(Run, ManifestFilesExistAndAreNonEmpty) {
  const auto cfg = ex::parse_config(strip_uniqueness(2.0));
  const auto dir = scratch("manifest");
  const auto res = ex::run(cfg, dir);
  EXPECT_EQ(res.exit_code, ex::kExitOk);
  const auto rec = json::parse(io::read_file(dir / "run.json"));
  EXPECT_EQ(rec["schema"], 1);
  EXPECT_EQ(rec["config_hash"], cfg.hash);
  ASSERT_FALSE(rec["manifest"].empty());
  for (const auto& m : rec["manifest"]) {
    const auto p = dir / m["file"].get<std::string>();
    ASSERT_TRUE(fs::is_regular_file(p)) << p;
    EXPECT_GT(fs::file_size(p), 0u);
    EXPECT_EQ(fs::file_size(p), m["bytes"].get<std::uintmax_t>());
  }
  const auto summary = json::parse(io::read_file(dir / "summary.json"));
  EXPECT_EQ(summary["schema"], 1);
}

TEST(Run, SeededRunsAreByteIdentical) {
  const auto cfg = ex::parse_config(ex::load_config(fs::path(EPILAB_CONFIG_DIR) / "threshold_scan.json"));
  const auto a = scratch("det_a"), b = scratch("det_b");
  ex::run(cfg, a);
  ex::run(cfg, b);
  EXPECT_EQ(io::read_file(a / "scan.csv"), io::read_file(b / "scan.csv"));
  const auto u = ex::parse_config(strip_uniqueness(2.0));
  ex::run(u, a);
  ex::run(u, b);
  EXPECT_EQ(io::read_file(a / "restarts.csv"), io::read_file(b / "restarts.csv"));
}

TEST(Run, NumericalErrorEmbedsTheModuleReport) {
  const auto dir = scratch("hyp");
  const auto res = ex::run(ex::parse_config(strip_uniqueness(3.5)), dir);
  EXPECT_EQ(res.exit_code, ex::kExitNumerical);
  const auto rec = json::parse(io::read_file(dir / "run.json"));
  EXPECT_EQ(rec["status"], "error");
  EXPECT_EQ(rec["error"]["kind"], "domain");
  EXPECT_EQ(rec["error"]["module"], "comparison");
  EXPECT_NE(rec["error"]["message"].get<std::string>().find("hypothesis violated"), std::string::npos);
  EXPECT_NEAR(rec["error"]["report"]["S"].get<double>(), 3.5, 0.01);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli("list-catalog", "list").code, 0);
  EXPECT_EQ(cli("", "none").code, 2);
  EXPECT_EQ(cli("run /nonexistent/config.json", "missing").code, 2);

  const auto bad_json = scratch("badjson") / "c.json";
  io::write_atomic(bad_json, "{\"experiment\": ");
  EXPECT_EQ(cli("run " + bad_json.string(), "badjson").code, 2);

  auto doc = strip_uniqueness(2.0);
  doc["grid"]["h"] = 0;
  auto r = cli("run " + write_config("h0", doc).string() + " -o " + scratch("h0_out").string(), "h0");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("grid.h"), std::string::npos);

  r = cli("run " + write_config("ok", strip_uniqueness(2.0)).string() + " -o " + scratch("ok_out").string(), "ok");
  EXPECT_EQ(r.code, 0) << r.err;

  r = cli("run " + write_config("hyp", strip_uniqueness(3.5)).string() + " -o " + scratch("hyp_out").string(),
          "hyp");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("hypothesis violated"), std::string::npos);

  const auto wrong = json::parse(R"({
    "experiment": "section",
    "domain": {"kind": "strip", "lo": 0, "hi": 2},
    "section": {"probe": {"lo": -1, "hi": 1, "count": 5}, "expect": {"value": 3}}
  })");
  r = cli("run " + write_config("wrong", wrong).string() + " -o " + scratch("wrong_out").string(), "wrong");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("FAIL  value_error"), std::string::npos);
}

TEST(Cli, VerifyExamplesPasses) {
  const auto out = scratch("verify_out");
  const auto r = cli(std::string("run ") + EPILAB_CONFIG_DIR + "/verify_examples.json -o " + out.string(), "verify");
  EXPECT_EQ(r.code, 0) << r.out << r.err;
}

TEST(Report, EmptyDirectoryIsAnError) {
  const auto r = cli("report " + scratch("empty").string(), "empty");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("run.json"), std::string::npos);
}

TEST(Report, ThresholdScanHeadline) {
  const auto out = scratch("scan_out");
  ASSERT_EQ(cli(std::string("run ") + EPILAB_CONFIG_DIR + "/threshold_scan.json -o " + out.string(), "scan").code, 0);
  const auto r = cli("report " + out.string(), "scan_report");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("epsilon_paper = 2.2214, failure width = 3.1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("PASS  failure_width_rel_error"), std::string::npos);
}

TEST(Report, MovingPlaneSignChanges) {
  const auto out = scratch("mp_out");
  ASSERT_EQ(
      cli(std::string("run ") + EPILAB_CONFIG_DIR + "/moving_plane_double_bump.json -o " + out.string(), "mp").code,
      0);
  const auto r = cli("report " + out.string(), "mp_report");
  EXPECT_EQ(r.code, 0);
  const auto pos = r.out.find("sign-change nodes: ");
  ASSERT_NE(pos, std::string::npos) << r.out;
  EXPECT_GT(std::stoi(r.out.substr(pos + 19)), 0);
}

// Copyright 2026 The evsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "evsr/cli.hpp"
#include "evsr/event_stream.hpp"

using namespace evsr;
namespace fs = std::filesystem;

namespace
{
struct Run
{
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args)
{
  args.insert(args.begin(), "evsr");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir
{
  fs::path path = fs::temp_directory_path() / "evsr_test_cli";
  TempDir()
  {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string & name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("end-to-end workflow")
{
  const TempDir dir;
  const auto gt = dir / "bar.evsr";
  auto r = run({"simulate", "--scene", "moving_bar", "--width", "24", "--height", "24", "--duration", "30000",
                "--speed", "2000", "--contrast", "3", "--out", gt});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("# scene=\"moving_bar\"") != std::string::npos);
  CHECK(load_stream(gt).width() == 24);

  r = run({"downsample", "--in", gt, "--factor", "2", "--out", dir / "lr.evsr"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("width=12") != std::string::npos);

  r = run({"train-dict", "--in", gt, "--factor", "2", "--atoms", "64", "--out", dir / "d.dict"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("atoms=64") != std::string::npos);

  for (const char * name : {"a.evsr", "b.evsr"}) {
    r = run({"super-resolve", "--in", dir / "lr.evsr", "--dict", dir / "d.dict", "--factor", "2", "--seed", "7",
             "--out", dir / name});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("# seed=7") != std::string::npos);
  }
  CHECK(slurp(dir / "a.evsr") == slurp(dir / "b.evsr"));
  CHECK(load_stream(dir / "a.evsr").width() == 24);

  r = run({"super-resolve", "--in", dir / "lr.evsr", "--baseline", "--out", dir / "base.evsr"});
  CHECK(r.code == kExitOk);

  r = run({"metrics", "--candidate", dir / "a.evsr", "--reference", gt});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("rmse=") != std::string::npos);
  CHECK(r.out.find("dfrf=") != std::string::npos);

  r = run({"render", "--in", gt, "--out-dir", dir / "render"});
  REQUIRE(r.code == kExitOk);
  CHECK(slurp(dir / "render/frame.pgm").rfind("P5\n24 24\n255\n", 0) == 0);
  CHECK(slurp(dir / "render/rates.csv").rfind("bin_start_us,on,off\n", 0) == 0);

  r = run({"experiment", "reconstruction", "--in", gt, "--dict", dir / "d.dict", "--out-dir", dir / "run"});
  REQUIRE(r.code == kExitOk);
  for (const char * f : {"report.txt", "config.ini", "frame_ground_truth.pgm", "frame_lr.pgm", "frame_sr.pgm", "rates.csv"}) {
    CHECK(fs::exists(dir.path / "run" / f));
  }
  CHECK(slurp(dir / "run/report.txt").rfind("rmse=", 0) == 0);

  SUBCASE("config file, with flags taking precedence")
  {
    std::ofstream(dir / "sr.ini") << "seed=11\nrate_bin=100\n";
    r = run({"super-resolve", "--config", dir / "sr.ini", "--in", dir / "lr.evsr", "--dict", dir / "d.dict",
             "--out", dir / "c.evsr"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("# seed=11") != std::string::npos);
    CHECK(r.out.find("# rate-bin=100") != std::string::npos);
    r = run({"super-resolve", "--config", dir / "sr.ini", "--seed", "3", "--in", dir / "lr.evsr", "--dict",
             dir / "d.dict", "--out", dir / "c.evsr"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("# seed=3") != std::string::npos);
  }
  SUBCASE("a run directory's config reproduces the run")
  {
    r = run({"experiment", "reconstruction", "--config", dir / "run/config.ini"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.substr(r.out.find("rmse=")) == slurp(dir / "run/report.txt"));
    CHECK(run({"super-resolve", "--config", dir / "missing.ini", "--in", dir / "lr.evsr", "--baseline", "--out",
               dir / "c.evsr"}).code == kExitUsage);
  }
  SUBCASE("magnification trains per factor without a dictionary")
  {
    r = run({"experiment", "magnification", "--in", gt, "--factors", "3", "--atoms", "32",
             "--out-dir", dir / "mag"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("dfrf_x3=") != std::string::npos);
    CHECK(fs::exists(dir.path / "mag/x3/frame_sr.pgm"));
  }
}

TEST_CASE("exit codes")
{
  const TempDir dir;
  CHECK(run({"--help"}).code == kExitOk);
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"simulate", "--out", dir / "x.evsr", "--bogus"}).code == kExitUsage);
  CHECK(run({"simulate", "--scene", "spiral", "--out", dir / "x.evsr"}).code == kExitUsage);
  CHECK(run({"downsample", "--in", dir / "missing.evsr", "--out", dir / "y.evsr"}).code == kExitData);

  std::ofstream(dir / "bad.evsr", std::ios::binary) << "not a stream";
  const auto r = run({"downsample", "--in", dir / "bad.evsr", "--out", dir / "y.evsr"});
  CHECK(r.code == kExitData);
  CHECK(r.err.find("error:") == 0);

  REQUIRE(run({"simulate", "--scene", "moving_bar", "--width", "8", "--height", "8", "--duration", "1000", "--out",
               dir / "s.evsr"}).code == kExitOk);
  CHECK(run({"experiment", "reconstruction", "--in", dir / "s.evsr", "--factor", "1", "--out-dir", dir / "r"}).code ==
        kExitUsage);
  CHECK(run({"super-resolve", "--in", dir / "s.evsr", "--out", dir / "o.evsr"}).code == kExitUsage);
}

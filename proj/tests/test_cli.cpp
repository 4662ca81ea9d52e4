#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "pwbeam/core.hpp"

using namespace pwbeam;
namespace fs = std::filesystem;

#ifndef PWBEAM_CLI_PATH
#error "PWBEAM_CLI_PATH must be defined"
#endif

namespace {

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(PWBEAM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const char* tag) {
  fs::path p = fs::temp_directory_path() / (std::string("pwbeam_cli_") + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

const std::string kTinyGeom =
    " --elements 24 --depth-mm 8 --z-min-mm 4 --density 6"
    " --lesion-radius-mm 1.2";

}  // namespace

TEST_CASE("simulate honors the count contract and writes targets") {
  fs::path dir = fresh_dir("counts");
  REQUIRE(run_cli("simulate --phantom cyst --out " + (dir / "d").string() +
                  " --num-samples 1 --angles 3 --angle-span 8 --seed 1" +
                  kTinyGeom) == 0);
  DataSample s = read_container(dir / "d" / "sample_0000.pwc");
  CHECK(s.frames.size() == 3);
  CHECK(s.target.has_value());
  CHECK(fs::exists(dir / "d" / "manifest.txt"));
  fs::remove_all(dir);
}

TEST_CASE("default angle flags give 75 angles spanning +-16 degrees") {
  fs::path dir = fresh_dir("angles");
  // wires keep the 75-angle default run cheap
  REQUIRE(run_cli("simulate --phantom wires --out " + (dir / "d").string() +
                  " --num-samples 1 --seed 1 --elements 24 --depth-mm 8"
                  " --z-min-mm 4") == 0);
  DataSample s = read_container(dir / "d" / "sample_0000.pwc");
  REQUIRE(s.acq.angles.size() == 75);
  CHECK(s.acq.angles.front() ==
        doctest::Approx(-16.0 * std::numbers::pi / 180.0));
  CHECK(s.acq.angles.back() ==
        doctest::Approx(16.0 * std::numbers::pi / 180.0));
  CHECK(s.acq.angles[37] == 0.0);
  CHECK(s.frames.size() == 75);
  fs::remove_all(dir);
}

TEST_CASE("same seed gives byte-identical containers") {
  fs::path dir = fresh_dir("seed");
  const std::string common = " --phantom cyst --num-samples 1 --angles 3"
                             " --angle-span 8 --seed 42" + kTinyGeom;
  REQUIRE(run_cli("simulate --out " + (dir / "a").string() + common) == 0);
  REQUIRE(run_cli("simulate --out " + (dir / "b").string() + common) == 0);
  CHECK(slurp(dir / "a" / "sample_0000.pwc") ==
        slurp(dir / "b" / "sample_0000.pwc"));
  fs::remove_all(dir);
}

TEST_CASE("beamform all equals single on a one-angle container") {
  fs::path dir = fresh_dir("oneangle");
  REQUIRE(run_cli("simulate --phantom cyst --out " + (dir / "d").string() +
                  " --num-samples 1 --angles 1 --angle-span 0 --seed 7" +
                  kTinyGeom) == 0);
  const std::string in = (dir / "d" / "sample_0000.pwc").string();
  REQUIRE(run_cli("beamform --in " + in + " --angles single --out " +
                  (dir / "s.pgm").string()) == 0);
  REQUIRE(run_cli("beamform --in " + in + " --angles all --out " +
                  (dir / "a.pgm").string()) == 0);
  CHECK(slurp(dir / "s.pgm") == slurp(dir / "a.pgm"));
  fs::remove_all(dir);
}

TEST_CASE("zero-data container beamforms to a uniform floor image") {
  fs::path dir = fresh_dir("zero");
  DataSample s;
  s.geom = ProbeGeometry::linear_array(8, 0.0003);
  s.acq.sampling_freq = 31.2e6;
  s.acq.center_freq = 7.8e6;
  s.acq.sound_speed = 1540.0;
  s.acq.num_samples = 64;
  s.acq.angles = {0.0};
  s.frames.resize(1);
  s.frames[0].angle_index = 0;
  s.frames[0].data = Mat(8, 64);
  write_container(s, dir / "zero.pwc");
  REQUIRE(run_cli("beamform --in " + (dir / "zero.pwc").string() +
                  " --angles single --out " + (dir / "z.pgm").string()) == 0);
  std::vector<char> pgm = slurp(dir / "z.pgm");
  // all payload bytes are 0 (the -DR floor maps to 0)
  const std::string header = "P5\n8 64\n255\n";
  REQUIRE(pgm.size() == header.size() + 8 * 64);
  for (std::size_t i = header.size(); i < pgm.size(); ++i)
    CHECK(pgm[i] == 0);
  fs::remove_all(dir);
}

TEST_CASE("exit codes: usage (2) and validation (3)") {
  fs::path dir = fresh_dir("exits");
  // unknown phantom kind -> usage error
  CHECK(run_cli("simulate --phantom blob --out " + (dir / "x").string()) == 2);
  // unknown subcommand flag -> usage error
  CHECK(run_cli("beamform --bogus 1") == 2);
  // missing container -> data error
  CHECK(run_cli("beamform --in " + (dir / "missing.pwc").string() +
                " --angles single --out " + (dir / "o.pgm").string()) == 3);
  // fraction <= 0 -> usage error
  CHECK(run_cli("train --data " + dir.string() + " --out " +
                (dir / "m.ckpt").string() + " --fraction 0") == 2);
  fs::remove_all(dir);
}

TEST_CASE("beamform single requires a zero-degree angle") {
  fs::path dir = fresh_dir("nozero");
  DataSample s;
  s.geom = ProbeGeometry::linear_array(8, 0.0003);
  s.acq.sampling_freq = 31.2e6;
  s.acq.center_freq = 7.8e6;
  s.acq.sound_speed = 1540.0;
  s.acq.num_samples = 64;
  s.acq.angles = {8.0 * std::numbers::pi / 180.0};
  s.frames.resize(1);
  s.frames[0].angle_index = 0;
  s.frames[0].data = Mat(8, 64);
  write_container(s, dir / "no_zero.pwc");
  CHECK(run_cli("beamform --in " + (dir / "no_zero.pwc").string() +
                " --angles single --out " + (dir / "o.pgm").string()) == 3);
  fs::remove_all(dir);
}

TEST_CASE("deterministic training runs are bit-identical") {
  fs::path dir = fresh_dir("train");
  REQUIRE(run_cli("simulate --phantom lesions --out " + (dir / "d").string() +
                  " --num-samples 4 --angles 3 --angle-span 8 --seed 5" +
                  kTinyGeom) == 0);
  const std::string common =
      " train --data " + (dir / "d").string() +
      " --model complete --channels 4 --kernel 3 --blocks 1 --convs 3"
      " --groups 2 --epochs 2 --seed 11 --test-fraction 0.25 --out ";
  REQUIRE(run_cli("--deterministic" + common + (dir / "a.ckpt").string()) == 0);
  REQUIRE(run_cli("--deterministic" + common + (dir / "b.ckpt").string()) == 0);
  CHECK(slurp(dir / "a.ckpt") == slurp(dir / "b.ckpt"));
  CHECK(fs::exists(dir / "a.ckpt.manifest"));

  // evaluation emits model and baseline rows for every global metric
  REQUIRE(run_cli("evaluate --ckpt " + (dir / "a.ckpt").string() + " --data " +
                  (dir / "d").string() + " --test-fraction 0.25 --report " +
                  (dir / "report.txt").string()) == 0);
  std::ifstream is(dir / "report.txt");
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  for (const char* metric : {"l1", "l2", "psnr", "ncc"}) {
    CHECK(text.find("subject=model metric=" + std::string(metric)) !=
          std::string::npos);
    CHECK(text.find("subject=baseline metric=" + std::string(metric)) !=
          std::string::npos);
  }
  fs::remove_all(dir);
}

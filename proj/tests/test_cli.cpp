#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace fs = std::filesystem;

namespace {

#ifndef OMNILOC_CLI_PATH
#error "OMNILOC_CLI_PATH must point at the command line binary"
#endif

const std::string kCli = OMNILOC_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("omniloc_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string synth_args(const std::string& out_dir, int seed) {
  return "synth --seed " + std::to_string(seed) +
         " --extent 3 2.5 2.2 --density 250 --texture noise --noise-step 1.5"
         " --splat-radius 2 --pano-height 128 --pano-width 256 --out-dir " +
         out_dir;
}

}  // namespace

TEST_CASE("synth produces the full scene file set deterministically") {
  TempDir a;
  TempDir b;
  REQUIRE(run(synth_args(a.sub(""), 11)) == 0);
  REQUIRE(run(synth_args(b.sub(""), 11)) == 0);
  for (const char* name : {"cloud.ply", "pano.png", "oracle.json", "descriptor.json"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(a.path / name));
    CHECK(read_bytes(a.sub(name)) == read_bytes(b.sub(name)));
  }
  TempDir c;
  REQUIRE(run(synth_args(c.sub(""), 12)) == 0);
  CHECK(read_bytes(a.sub("cloud.ply")) != read_bytes(c.sub("cloud.ply")));
}

TEST_CASE("localize and eval run end to end through files") {
  TempDir dir;
  REQUIRE(run(synth_args(dir.sub(""), 21)) == 0);
  {
    std::ofstream cfg(dir.sub("fast.cfg"));
    cfg << "n_t = 20\nn_r = 8\nk1 = 30\nk2 = 3\nn_iter = 40\n";
  }
  const int code = run("localize --cloud " + dir.sub("cloud.ply") + " --image " +
                       dir.sub("pano.png") + " --config " + dir.sub("fast.cfg") +
                       " --gravity-known --seed 21 --out " + dir.sub("result.json"));
  CHECK(code == 0);
  REQUIRE(fs::exists(dir.path / "result.json"));

  fs::create_directories(dir.path / "results");
  fs::create_directories(dir.path / "truth");
  fs::copy(dir.path / "result.json", dir.path / "results" / "scene.json");
  fs::copy(dir.path / "oracle.json", dir.path / "truth" / "scene.json");
  CHECK(run("eval --results " + dir.sub("results") + " --truth " + dir.sub("truth") +
            " --out " + dir.sub("summary.json")) == 0);
  CHECK(fs::exists(dir.path / "summary.json"));
}

TEST_CASE("missing inputs exit with the bad-input code") {
  TempDir dir;
  const int code = run("localize --cloud " + dir.sub("nope.ply") + " --image " +
                       dir.sub("nope.png") + " --out " + dir.sub("r.json"));
  CHECK(code == 2);
}

TEST_CASE("degenerate clouds exit with the failure code") {
  TempDir dir;
  {
    // single vertex at the origin: every candidate pose sits on it
    std::ofstream out(dir.sub("point.ply"));
    out << "ply\nformat ascii 1.0\nelement vertex 1\n"
           "property float x\nproperty float y\nproperty float z\n"
           "property uchar red\nproperty uchar green\nproperty uchar blue\n"
           "end_header\n0 0 0 128 128 128\n";
  }
  REQUIRE(run(synth_args(dir.sub(""), 31)) == 0);
  {
    std::ofstream cfg(dir.sub("tiny.cfg"));
    cfg << "n_t = 2\nn_r = 2\nk1 = 4\nk2 = 1\nn_iter = 2\n";
  }
  const int code = run("localize --cloud " + dir.sub("point.ply") + " --image " +
                       dir.sub("pano.png") + " --config " + dir.sub("tiny.cfg") +
                       " --out " + dir.sub("r.json"));
  CHECK(code == 3);
}

TEST_CASE("bench smoke run completes") {
  CHECK(run("bench --points 20000 --repeat 1 --seed 2") == 0);
}

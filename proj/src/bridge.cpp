#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fstream>
#include <thread>
#include <vector>

#include "json.hpp"
#include "lpr/denoise.hpp"
#include "lpr/image_io.hpp"

extern char** environ;

namespace lpr {

namespace {

namespace fs = std::filesystem;

class ScratchDir {
 public:
  explicit ScratchDir(const fs::path& parent) {
    fs::path base = parent.empty() ? fs::temp_directory_path() : parent;
    std::string templ = (base / "lpr-bridge-XXXXXX").string();
    std::vector<char> buf(templ.begin(), templ.end());
    buf.push_back('\0');
    if (mkdtemp(buf.data()) == nullptr) {
      throw BridgeError("bridge: cannot create scratch directory under " + base.string());
    }
    path_ = buf.data();
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

// Runs `/bin/sh -c line` in its own process group; kills the group on timeout.
int run_with_timeout(const std::string& line, std::chrono::milliseconds timeout) {
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);

  const char* argv[] = {"/bin/sh", "-c", line.c_str(), nullptr};
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, "/bin/sh", nullptr, &attr, const_cast<char* const*>(argv), environ);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) throw BridgeError("bridge: cannot spawn /bin/sh");

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  auto pause = std::chrono::milliseconds(1);
  for (;;) {
    int status = 0;
    const pid_t done = waitpid(pid, &status, WNOHANG);
    if (done == pid) {
      if (WIFEXITED(status)) return WEXITSTATUS(status);
      return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
    }
    if (done < 0) throw BridgeError("bridge: waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      waitpid(pid, &status, 0);
      throw BridgeError("bridge: command timed out after " + std::to_string(timeout.count()) + " ms");
    }
    std::this_thread::sleep_for(pause);
    pause = std::min(pause * 2, std::chrono::milliseconds(50));
  }
}

}  // namespace

ExternalBridge::ExternalBridge(std::string command, std::chrono::milliseconds timeout,
                               std::filesystem::path scratch)
    : command_(std::move(command)), timeout_(timeout), scratch_(std::move(scratch)) {
  if (command_.empty()) throw ArgumentError("bridge: empty command");
  if (timeout_.count() <= 0) throw ArgumentError("bridge: timeout must be positive");
}

RealImage ExternalBridge::run(const RealImage& v, double sigma) const {
  require_nonempty(v, "external_bridge");
  std::lock_guard lock(mu_);
  ScratchDir dir(scratch_);
  write_lprf(dir.path() / "in.lprf", {v});
  {
    std::ofstream meta(dir.path() / "meta.json");
    meta << nlohmann::json{{"sigma", sigma}}.dump() << "\n";
    if (!meta) throw BridgeError("bridge: cannot write meta.json");
  }

  const int code = run_with_timeout(command_ + " " + shell_quote(dir.path().string()), timeout_);
  if (code != 0) throw BridgeError("bridge: command exited with status " + std::to_string(code));

  const fs::path out = dir.path() / "out.lprf";
  if (!fs::exists(out)) throw BridgeError("bridge: command produced no out.lprf");
  std::vector<RealImage> planes;
  try {
    planes = read_lprf(out);
  } catch (const IoError& e) {
    throw BridgeError(std::string("bridge: malformed response: ") + e.what());
  }
  if (planes.size() != 1 || !planes.front().same_shape(v)) {
    throw BridgeError("bridge: response must be one plane of " + to_string(dims_of(v)));
  }
  return std::move(planes.front());
}

RealImage external_bridge(const RealImage& v, const std::string& command, double sigma,
                          std::chrono::milliseconds timeout) {
  return ExternalBridge(command, timeout).run(v, sigma);
}

}  // namespace lpr

#include "eoscript/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <system_error>

extern char** environ;

namespace eoscript {

namespace {

class Pipe {
 public:
  Pipe() {
    if (::pipe2(fds_, O_CLOEXEC) != 0) throw std::system_error(errno, std::generic_category(), "pipe2");
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  Pipe(const Pipe&) = delete;
  Pipe& operator=(const Pipe&) = delete;

  int read_end() const { return fds_[0]; }
  int write_end() const { return fds_[1]; }
  void close_read() { close_fd(fds_[0]); }
  void close_write() { close_fd(fds_[1]); }

 private:
  static void close_fd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
  int fds_[2] = {-1, -1};
};

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input,
                          const ProcessOptions& options) {
  if (argv.empty()) throw std::invalid_argument("run_process: empty argv");
  // A child that exits without reading stdin must not take the parent down.
  static const bool sigpipe_ignored = (::signal(SIGPIPE, SIG_IGN), true);
  (void)sigpipe_ignored;

  // Everything the child needs is prepared before fork; the child only calls
  // async-signal-safe functions.
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  std::vector<std::string> env_storage;
  for (char** e = environ; e && *e; ++e) {
    std::string entry = *e;
    auto eq = entry.find('=');
    if (eq != std::string::npos && options.extra_env.contains(entry.substr(0, eq))) continue;
    env_storage.push_back(std::move(entry));
  }
  for (const auto& [k, v] : options.extra_env) env_storage.push_back(k + "=" + v);
  std::vector<char*> envp;
  for (auto& e : env_storage) envp.push_back(e.data());
  envp.push_back(nullptr);

  const std::string cwd = options.working_dir.string();

  Pipe in_pipe, out_pipe, err_pipe;
  const pid_t pid = ::fork();
  if (pid < 0) throw std::system_error(errno, std::generic_category(), "fork");
  if (pid == 0) {
    ::dup2(in_pipe.read_end(), STDIN_FILENO);
    ::dup2(out_pipe.write_end(), STDOUT_FILENO);
    ::dup2(err_pipe.write_end(), STDERR_FILENO);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) ::_exit(126);
    ::execvpe(args[0], args.data(), envp.data());
    ::_exit(127);
  }

  in_pipe.close_read();
  out_pipe.close_write();
  err_pipe.close_write();
  set_nonblocking(in_pipe.write_end());
  set_nonblocking(out_pipe.read_end());
  set_nonblocking(err_pipe.read_end());

  ProcessResult result;
  std::size_t written = 0;
  if (input.empty()) in_pipe.close_write();
  bool out_open = true, err_open = true;
  const auto deadline = std::chrono::steady_clock::now() + options.timeout;
  char buf[65536];

  while (out_open || err_open || in_pipe.write_end() >= 0) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      break;
    }
    pollfd fds[3];
    nfds_t n = 0;
    int in_slot = -1, out_slot = -1, err_slot = -1;
    if (in_pipe.write_end() >= 0) {
      fds[n] = {in_pipe.write_end(), POLLOUT, 0};
      in_slot = static_cast<int>(n++);
    }
    if (out_open) {
      fds[n] = {out_pipe.read_end(), POLLIN, 0};
      out_slot = static_cast<int>(n++);
    }
    if (err_open) {
      fds[n] = {err_pipe.read_end(), POLLIN, 0};
      err_slot = static_cast<int>(n++);
    }
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    const int rc = ::poll(fds, n, static_cast<int>(std::min<long long>(remaining + 1, 1000)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (in_slot >= 0 && (fds[in_slot].revents & (POLLOUT | POLLERR | POLLHUP))) {
      if (fds[in_slot].revents & POLLOUT) {
        const ssize_t w = ::write(in_pipe.write_end(), input.data() + written, input.size() - written);
        if (w > 0) written += static_cast<std::size_t>(w);
        if (w < 0 && errno != EAGAIN) written = input.size();
      } else {
        written = input.size();
      }
      if (written >= input.size()) in_pipe.close_write();
    }
    auto drain = [&](int slot, int fd, std::string& sink, bool& open) {
      if (slot < 0 || !(fds[slot].revents & (POLLIN | POLLHUP | POLLERR))) return;
      const ssize_t r = ::read(fd, buf, sizeof(buf));
      if (r > 0) {
        if (sink.size() + static_cast<std::size_t>(r) <= options.max_output_bytes) sink.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || errno != EAGAIN) {
        open = false;
      }
    };
    drain(out_slot, out_pipe.read_end(), result.stdout_data, out_open);
    drain(err_slot, err_pipe.read_end(), result.stderr_data, err_open);
  }

  if (result.timed_out) ::kill(pid, SIGKILL);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (!result.timed_out) {
    if (WIFEXITED(status)) {
      result.exit_status = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
      result.signaled = true;
      result.term_signal = WTERMSIG(status);
    }
  }
  return result;
}

}  // namespace eoscript

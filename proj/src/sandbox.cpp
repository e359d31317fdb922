#include "datagen/sandbox.hpp"

#include "datagen/errors.hpp"
#include "datagen/util.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>

namespace datagen {
namespace {

namespace fs = std::filesystem;

std::string resolve_executable(const std::string &name, const std::string &path_var) {
    if (name.find('/') != std::string::npos)
        return name;
    std::size_t start = 0;
    while (start <= path_var.size()) {
        auto end = path_var.find(':', start);
        auto dir = path_var.substr(start, end == std::string::npos ? std::string::npos : end - start);
        if (!dir.empty()) {
            auto candidate = dir + "/" + name;
            if (::access(candidate.c_str(), X_OK) == 0)
                return candidate;
        }
        if (end == std::string::npos)
            break;
        start = end + 1;
    }
    return {};
}

struct Pipe {
    int fds[2] = {-1, -1};

    void open(int flags = 0) {
        if (::pipe2(fds, flags) != 0)
            throw Error(std::string("pipe failed: ") + std::strerror(errno));
    }
    void close_read() { close_fd(fds[0]); }
    void close_write() { close_fd(fds[1]); }
    static void close_fd(int &fd) {
        if (fd >= 0) {
            ::close(fd);
            fd = -1;
        }
    }
    ~Pipe() {
        close_read();
        close_write();
    }
};

class TempDir {
  public:
    TempDir() {
        auto base = fs::temp_directory_path() / "datagen-sbx-XXXXXX";
        std::string pattern = base.string();
        if (!::mkdtemp(pattern.data()))
            throw Error(std::string("cannot create sandbox directory: ") + std::strerror(errno));
        path_ = pattern;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path &path() const { return path_; }

  private:
    fs::path path_;
};

} // namespace

SandboxResult execute_sandboxed(const std::string &source, const SandboxOptions &options) {
    if (options.interpreter.empty() || options.interpreter.front().empty())
        throw ConfigError("sandbox interpreter command is empty");
    SandboxResult result;
    TempDir dir;
    auto script = dir.path() / options.file_name;
    write_file_atomic(script, source);

    const char *parent_path = std::getenv("PATH");
    std::string path_var = parent_path ? parent_path : "/usr/local/bin:/usr/bin:/bin";
    auto exe = resolve_executable(options.interpreter.front(), path_var);
    if (exe.empty()) {
        result.exit_status = 127;
        result.error = "interpreter not found: " + options.interpreter.front();
        return result;
    }

    // Everything the child needs is prepared before fork.
    std::vector<std::string> args(options.interpreter.begin(), options.interpreter.end());
    args.push_back(script.string());
    std::vector<char *> argv;
    for (auto &a : args)
        argv.push_back(a.data());
    argv.push_back(nullptr);
    std::vector<std::string> env{"PATH=" + path_var, "HOME=" + dir.path().string(), "TMPDIR=" + dir.path().string(),
                                 "PYTHONDONTWRITEBYTECODE=1", "LANG=C.UTF-8"};
    std::vector<char *> envp;
    for (auto &e : env)
        envp.push_back(e.data());
    envp.push_back(nullptr);
    std::string workdir = dir.path().string();

    Pipe out, err, status;
    out.open();
    err.open();
    status.open(O_CLOEXEC);

    auto start = std::chrono::steady_clock::now();
    pid_t pid = ::fork();
    if (pid < 0)
        throw Error(std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
        ::setpgid(0, 0);
        char isolated = '0';
        if (options.isolate_network && ::unshare(CLONE_NEWUSER | CLONE_NEWNET) == 0)
            isolated = '1';
        int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0)
            ::dup2(devnull, STDIN_FILENO);
        ::dup2(out.fds[1], STDOUT_FILENO);
        ::dup2(err.fds[1], STDERR_FILENO);
        ::close(out.fds[0]);
        ::close(err.fds[0]);
        ::close(status.fds[0]);
        if (::chdir(workdir.c_str()) != 0)
            ::_exit(126);
        struct rlimit core{0, 0};
        ::setrlimit(RLIMIT_CORE, &core);
        struct rlimit fsize{16u << 20, 16u << 20};
        ::setrlimit(RLIMIT_FSIZE, &fsize);
        [[maybe_unused]] auto w = ::write(status.fds[1], &isolated, 1);
        ::execve(exe.c_str(), argv.data(), envp.data());
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    out.close_write();
    err.close_write();
    status.close_write();

    char flag = '0';
    if (::read(status.fds[0], &flag, 1) == 1)
        result.network_isolated = flag == '1';

    auto deadline = start + options.timeout;
    auto remaining_ms = [&] {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        return std::max<long long>(0, left.count());
    };
    auto append = [&](std::string &buf, const char *data, std::size_t n) {
        std::size_t room = options.output_cap > buf.size() ? options.output_cap - buf.size() : 0;
        if (n > room)
            result.truncated = true;
        buf.append(data, std::min(n, room));
    };

    bool out_open = true, err_open = true;
    char chunk[8192];
    while (out_open || err_open) {
        auto wait = remaining_ms();
        if (wait == 0) {
            result.timed_out = true;
            break;
        }
        pollfd fds[2];
        nfds_t count = 0;
        if (out_open)
            fds[count++] = {out.fds[0], POLLIN, 0};
        if (err_open)
            fds[count++] = {err.fds[0], POLLIN, 0};
        int rc = ::poll(fds, count, static_cast<int>(std::min<long long>(wait, 100)));
        if (rc < 0) {
            if (errno == EINTR)
                continue;
            break;
        }
        for (nfds_t k = 0; k < count; ++k) {
            if (!(fds[k].revents & (POLLIN | POLLHUP | POLLERR)))
                continue;
            bool is_out = fds[k].fd == out.fds[0];
            auto n = ::read(fds[k].fd, chunk, sizeof chunk);
            if (n <= 0) {
                (is_out ? out_open : err_open) = false;
                continue;
            }
            append(is_out ? result.stdout_text : result.stderr_text, chunk, static_cast<std::size_t>(n));
        }
    }

    int wstatus = 0;
    bool reaped = false;
    while (!result.timed_out) {
        pid_t r = ::waitpid(pid, &wstatus, WNOHANG);
        if (r == pid) {
            reaped = true;
            break;
        }
        if (r < 0)
            break;
        if (remaining_ms() == 0) {
            result.timed_out = true;
            break;
        }
        ::usleep(2000);
    }
    ::kill(-pid, SIGKILL);
    if (!reaped)
        ::waitpid(pid, &wstatus, 0);
    result.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    if (WIFEXITED(wstatus))
        result.exit_status = WEXITSTATUS(wstatus);
    else if (WIFSIGNALED(wstatus))
        result.exit_status = -WTERMSIG(wstatus);

    if (result.timed_out) {
        result.error = "timed out";
    } else if (result.exit_status != 0) {
        result.error = "exit status " + std::to_string(result.exit_status);
    } else if (!result.truncated) {
        auto lines = split_lines(result.stdout_text);
        for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
            auto t = trim(*it);
            if (!t.empty()) {
                result.candidate = t;
                break;
            }
        }
        if (!result.candidate)
            result.error = "no output";
    } else {
        result.error = "output exceeded the cap";
    }
    return result;
}

} // namespace datagen

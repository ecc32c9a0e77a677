#include "itinera/common/files.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace itinera::files {

std::string read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
        throw std::runtime_error("read failed for " + path.string());
    }
    return buffer.str();
}

namespace {

void write_fd(int fd, std::string_view content, const std::filesystem::path& path) {
    std::size_t written = 0;
    while (written < content.size()) {
        const auto n = ::write(fd, content.data() + written, content.size() - written);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw std::runtime_error("write failed for " + path.string() + ": " + std::strerror(errno));
        }
        written += static_cast<std::size_t>(n);
    }
}

}  // namespace

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) {
        throw std::runtime_error("cannot create " + tmp.string() + ": " + std::strerror(errno));
    }
    try {
        write_fd(fd, content, tmp);
    } catch (...) {
        ::close(fd);
        std::filesystem::remove(tmp);
        throw;
    }
    ::fsync(fd);
    ::close(fd);
    std::filesystem::rename(tmp, path);
}

void append_line(const std::filesystem::path& path, std::string_view line) {
    append_lines(path, {std::string(line)});
}

void append_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::string buffer;
    for (const auto& line : lines) {
        buffer += line;
        buffer.push_back('\n');
    }
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) {
        throw std::runtime_error("cannot open " + path.string() + ": " + std::strerror(errno));
    }
    try {
        write_fd(fd, buffer, path);
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
}

}  // namespace itinera::files

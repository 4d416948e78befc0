#pragma once

#include <fcntl.h>
#include <glob.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <openssl/evp.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "riskmap/error.hpp"

namespace riskmap {

namespace fs = std::filesystem;

/// Read-only view of a whole input file. Plain files are memory-mapped,
/// `.gz` files are inflated into memory.
class InputBuffer {
 public:
  InputBuffer() = default;

  static InputBuffer from_string(std::string text, std::string label = "<memory>") {
    InputBuffer b;
    b.owned_ = std::move(text);
    b.view_ = b.owned_;
    b.label_ = std::move(label);
    return b;
  }

  static InputBuffer open(const fs::path& path) {
    const std::string p = path.string();
    if (path.extension() == ".gz") return from_string(inflate_file(p), p);

    InputBuffer b;
    b.label_ = p;
    const int fd = ::open(p.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd < 0) throw IoError("cannot open " + p + ": " + std::strerror(errno));
    struct stat st {};
    if (::fstat(fd, &st) != 0 || !S_ISREG(st.st_mode)) {
      ::close(fd);
      throw IoError("cannot read " + p + ": not a regular file");
    }
    if (st.st_size > 0) {
      void* addr = ::mmap(nullptr, static_cast<std::size_t>(st.st_size),
                          PROT_READ, MAP_PRIVATE, fd, 0);
      if (addr == MAP_FAILED) {
        ::close(fd);
        throw IoError("cannot map " + p + ": " + std::strerror(errno));
      }
      ::madvise(addr, static_cast<std::size_t>(st.st_size), MADV_SEQUENTIAL);
      b.map_ = addr;
      b.map_size_ = static_cast<std::size_t>(st.st_size);
      b.view_ = {static_cast<const char*>(addr), b.map_size_};
    }
    ::close(fd);
    return b;
  }

  InputBuffer(InputBuffer&& o) noexcept { *this = std::move(o); }
  InputBuffer& operator=(InputBuffer&& o) noexcept {
    if (this != &o) {
      release();
      const bool was_owned = o.map_ == nullptr && !o.owned_.empty();
      owned_ = std::move(o.owned_);
      map_ = o.map_;
      map_size_ = o.map_size_;
      view_ = was_owned ? std::string_view{owned_} : o.view_;
      label_ = std::move(o.label_);
      o.map_ = nullptr;
      o.map_size_ = 0;
      o.view_ = {};
    }
    return *this;
  }
  InputBuffer(const InputBuffer&) = delete;
  InputBuffer& operator=(const InputBuffer&) = delete;
  ~InputBuffer() { release(); }

  std::string_view view() const noexcept { return view_; }
  const std::string& label() const noexcept { return label_; }

 private:
  void release() noexcept {
    if (map_) ::munmap(map_, map_size_);
    map_ = nullptr;
    map_size_ = 0;
  }

  static std::string inflate_file(const std::string& p) {
    gzFile gz = ::gzopen(p.c_str(), "rb");
    if (!gz) throw IoError("cannot open " + p);
    std::string out;
    std::array<char, 1 << 16> chunk{};
    for (;;) {
      const int n = ::gzread(gz, chunk.data(), static_cast<unsigned>(chunk.size()));
      if (n < 0) {
        int code = 0;
        std::string msg = ::gzerror(gz, &code);
        ::gzclose(gz);
        throw IoError("cannot inflate " + p + ": " + msg);
      }
      if (n == 0) break;
      out.append(chunk.data(), static_cast<std::size_t>(n));
    }
    ::gzclose(gz);
    return out;
  }

  std::string owned_;
  void* map_ = nullptr;
  std::size_t map_size_ = 0;
  std::string_view view_;
  std::string label_;
};

inline std::string read_stream(std::istream& in, const std::string& label) {
  if (!in) throw IoError("cannot read " + label);
  std::string text{std::istreambuf_iterator<char>{in}, {}};
  if (in.bad()) throw IoError("cannot read " + label);
  return text;
}

inline std::string read_text_file(const fs::path& path) {
  return std::string{InputBuffer::open(path).view()};
}

/// Writes through a sibling temp file and renames, so readers never see a
/// half-written artifact.
inline void write_text_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// Shell-style pattern expansion; result sorted. A pattern without wildcards
/// must name an existing file.
inline std::vector<fs::path> expand_glob(const std::string& pattern) {
  glob_t g{};
  const int rc = ::glob(pattern.c_str(), GLOB_NOSORT, nullptr, &g);
  std::vector<fs::path> out;
  if (rc == 0)
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  ::globfree(&g);
  if (rc == GLOB_NOMATCH || out.empty())
    throw IoError("no input files match " + pattern);
  if (rc != 0) throw IoError("cannot expand " + pattern);
  std::sort(out.begin(), out.end());
  return out;
}

/// Incremental SHA-256, hex encoded.
class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
      throw Error("sha256 init failed");
  }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;
  ~Sha256() { EVP_MD_CTX_free(ctx_); }

  Sha256& update(std::string_view bytes) {
    EVP_DigestUpdate(ctx_, bytes.data(), bytes.size());
    return *this;
  }

  /// Length-prefixed, so concatenated fields cannot alias.
  Sha256& field(std::string_view bytes) {
    const std::string len = std::to_string(bytes.size()) + ":";
    return update(len).update(bytes);
  }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int n = 0;
    EVP_DigestFinal_ex(ctx_, md.data(), &n);
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < n; ++i) {
      out.push_back(digits[md[i] >> 4]);
      out.push_back(digits[md[i] & 15]);
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

inline std::string sha256_file(const fs::path& path) {
  const InputBuffer buf = InputBuffer::open(path);
  return Sha256{}.update(buf.view()).hex();
}

}  // namespace riskmap

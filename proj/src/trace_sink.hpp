// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <streambuf>
#include <string>

namespace ponvdba::detail {

// Output stream that hashes everything written to it and, when given a path,
// stages it in "<path>.tmp" until commit() renames it into place. An
// uncommitted sink removes its temporary file.
class TraceSink {
 public:
  explicit TraceSink(std::filesystem::path target);  // empty path: hash only
  ~TraceSink();

  TraceSink(const TraceSink&) = delete;
  TraceSink& operator=(const TraceSink&) = delete;

  std::ostream& stream() { return stream_; }

  // Flushes, renames the staged file into place and returns the SHA-256 hex
  // digest of everything written.
  std::string commit();

  const std::filesystem::path& target() const { return target_; }

 private:
  class Buffer : public std::streambuf {
   public:
    Buffer(EVP_MD_CTX* ctx, std::ofstream* file);
    void drain();

   protected:
    int_type overflow(int_type ch) override;
    int sync() override;

   private:
    EVP_MD_CTX* ctx_;
    std::ofstream* file_;
    std::array<char, 1 << 16> data_{};
  };

  std::filesystem::path target_;
  std::filesystem::path staged_;
  std::unique_ptr<EVP_MD_CTX, void (*)(EVP_MD_CTX*)> ctx_;
  std::ofstream file_;
  Buffer buffer_;
  std::ostream stream_;
  bool committed_ = false;
};

}  // namespace ponvdba::detail

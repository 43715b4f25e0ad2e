// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#include "trace_sink.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <string_view>
#include <system_error>

#include "ponvdba/errors.hpp"
#include "ponvdba/pipeline.hpp"

namespace ponvdba {

namespace {

std::string to_hex(const unsigned char* digest, unsigned len) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  return to_hex(digest, len);
}

namespace detail {

TraceSink::Buffer::Buffer(EVP_MD_CTX* ctx, std::ofstream* file) : ctx_(ctx), file_(file) {
  setp(data_.data(), data_.data() + data_.size());
}

void TraceSink::Buffer::drain() {
  const auto n = static_cast<std::size_t>(pptr() - pbase());
  if (n == 0) return;
  EVP_DigestUpdate(ctx_, pbase(), n);
  if (file_ != nullptr && file_->is_open()) file_->write(pbase(), static_cast<std::streamsize>(n));
  setp(data_.data(), data_.data() + data_.size());
}

TraceSink::Buffer::int_type TraceSink::Buffer::overflow(int_type ch) {
  drain();
  if (!traits_type::eq_int_type(ch, traits_type::eof())) {
    *pptr() = traits_type::to_char_type(ch);
    pbump(1);
  }
  return traits_type::not_eof(ch);
}

int TraceSink::Buffer::sync() {
  drain();
  return 0;
}

TraceSink::TraceSink(std::filesystem::path target)
    : target_(std::move(target)),
      ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free),
      buffer_(ctx_.get(), &file_),
      stream_(&buffer_) {
  EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr);
  if (!target_.empty()) {
    staged_ = target_;
    staged_ += ".tmp";
    file_.open(staged_, std::ios::binary | std::ios::trunc);
    if (!file_) throw Error("cannot open output file " + staged_.string());
  }
}

TraceSink::~TraceSink() {
  if (!committed_ && !staged_.empty()) {
    file_.close();
    std::error_code ec;
    std::filesystem::remove(staged_, ec);
  }
}

std::string TraceSink::commit() {
  stream_.flush();
  buffer_.drain();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx_.get(), digest, &len);
  if (!staged_.empty()) {
    file_.close();
    if (!file_) throw Error("failed writing " + staged_.string());
    std::filesystem::rename(staged_, target_);
  }
  committed_ = true;
  return to_hex(digest, len);
}

}  // namespace detail
}  // namespace ponvdba

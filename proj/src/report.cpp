#include "pvstab/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <system_error>
#include <utility>

#include "pvstab/errors.hpp"

namespace pvstab::report {

Json Json::boolean(bool v) {
  Json j;
  j.type_ = Type::Bool;
  j.b_ = v;
  return j;
}

Json Json::integer(long long v) {
  Json j;
  j.type_ = Type::Int;
  j.i_ = v;
  return j;
}

Json Json::number(double v) {
  Json j;
  j.type_ = Type::Double;
  j.d_ = v;
  return j;
}

Json Json::str(std::string v) {
  Json j;
  j.type_ = Type::String;
  j.s_ = std::move(v);
  return j;
}

Json Json::array() {
  Json j;
  j.type_ = Type::Array;
  return j;
}

Json Json::object() {
  Json j;
  j.type_ = Type::Object;
  return j;
}

void Json::push_back(Json v) {
  if (type_ != Type::Array)
    throw EngineError("Json::push_back on a non-array value");
  arr_.push_back(std::move(v));
}

void Json::set(const std::string& key, Json v) {
  if (type_ != Type::Object)
    throw EngineError("Json::set on a non-object value");
  obj_[key] = std::move(v);
}

namespace {

void emit_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (unsigned char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\b':
        out += "\\b";
        break;
      case '\f':
        out += "\\f";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

void indent_to(std::string& out, int indent) {
  out.append(static_cast<std::size_t>(indent) * 2, ' ');
}

}  // namespace

void Json::emit(std::string& out, int indent) const {
  switch (type_) {
    case Type::Null:
      out += "null";
      return;
    case Type::Bool:
      out += b_ ? "true" : "false";
      return;
    case Type::Int: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%lld", i_);
      out += buf;
      return;
    }
    case Type::Double:
      // JSON has no NaN/Inf literal; nonfinite values degrade to null.
      if (!std::isfinite(d_)) {
        out += "null";
        return;
      }
      out += format_double(d_);
      return;
    case Type::String:
      emit_escaped(out, s_);
      return;
    case Type::Array: {
      if (arr_.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < arr_.size(); ++i) {
        indent_to(out, indent + 1);
        arr_[i].emit(out, indent + 1);
        if (i + 1 < arr_.size()) out += ',';
        out += '\n';
      }
      indent_to(out, indent);
      out += ']';
      return;
    }
    case Type::Object: {
      if (obj_.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (const auto& [key, value] : obj_) {
        indent_to(out, indent + 1);
        emit_escaped(out, key);
        out += ": ";
        value.emit(out, indent + 1);
        if (++i < obj_.size()) out += ',';
        out += '\n';
      }
      indent_to(out, indent);
      out += '}';
      return;
    }
  }
}

std::string Json::dump() const {
  std::string out;
  emit(out, 0);
  out += '\n';
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::string csv_document(const std::vector<std::string>& comments,
                         const std::string& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& c : comments) {
    out += "# ";
    out += c;
    out += '\n';
  }
  out += header;
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + tmp);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed: " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ec2;
    std::filesystem::remove(tmp, ec2);
    throw IoError("rename failed: " + tmp + " -> " + path + ": " +
                  ec.message());
  }
}

OutputSession::OutputSession(std::string directory)
    : dir_(std::move(directory)) {
  if (dir_.empty()) throw IoError("output directory is empty");
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create output directory " + dir_ + ": " +
                        ec.message());
}

OutputSession::~OutputSession() {
  if (committed_) return;
  for (const auto& f : files_) {
    std::error_code ec;
    std::filesystem::remove(f, ec);
  }
}

void OutputSession::write(const std::string& filename,
                          const std::string& content) {
  const std::string full =
      (std::filesystem::path(dir_) / filename).string();
  write_file_atomic(full, content);
  files_.push_back(full);
}

}  // namespace pvstab::report

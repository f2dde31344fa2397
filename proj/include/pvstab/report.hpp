#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pvstab::report {

inline constexpr const char* kToolVersion = "1.0.0";

/// Deterministic JSON document builder: object keys are emitted sorted,
/// doubles are printed with %.17g (round-trip exact), output is 2-space
/// indented and ends with one newline. Byte-identical output for identical
/// values is part of the output contract, which is why this is not delegated
/// to a general-purpose serializer.
class Json {
 public:
  enum class Type { Null, Bool, Int, Double, String, Array, Object };

  Json() = default;
  static Json null() { return Json(); }
  static Json boolean(bool v);
  static Json integer(long long v);
  static Json number(double v);
  static Json str(std::string v);
  static Json array();
  static Json object();

  Type type() const { return type_; }

  /// Appends to an array; the value must have been created with array().
  void push_back(Json v);
  /// Inserts or replaces a key; the value must have been created with
  /// object().
  void set(const std::string& key, Json v);

  std::string dump() const;

 private:
  void emit(std::string& out, int indent) const;

  Type type_ = Type::Null;
  bool b_ = false;
  long long i_ = 0;
  double d_ = 0.0;
  std::string s_;
  std::vector<Json> arr_;
  std::map<std::string, Json> obj_;
};

/// %.17g rendering shared by the JSON and CSV writers.
std::string format_double(double v);

/// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a64(const std::string& bytes);

/// Fixed-width lowercase hex of a 64-bit value.
std::string hex64(std::uint64_t v);

/// CSV with `# key=value` provenance/comment lines above a frozen header.
/// Every line, the last row included, ends with '\n'.
std::string csv_document(const std::vector<std::string>& comments,
                         const std::string& header,
                         const std::vector<std::vector<std::string>>& rows);

/// Writes content to path via a temporary file in the same directory plus
/// an atomic rename. Throws IoError; a failed write leaves no partial file.
void write_file_atomic(const std::string& path, const std::string& content);

/// Collects the files written by one command so that a failure part-way
/// through removes everything already produced instead of leaving a torn
/// output directory.
class OutputSession {
 public:
  explicit OutputSession(std::string directory);
  OutputSession(const OutputSession&) = delete;
  OutputSession& operator=(const OutputSession&) = delete;
  ~OutputSession();

  /// Atomic write of directory/filename; the file is tracked for rollback.
  void write(const std::string& filename, const std::string& content);
  /// Declares the command complete: files are kept.
  void commit() { committed_ = true; }
  const std::vector<std::string>& written() const { return files_; }
  const std::string& directory() const { return dir_; }

 private:
  std::string dir_;
  std::vector<std::string> files_;
  bool committed_ = false;
};

}  // namespace pvstab::report

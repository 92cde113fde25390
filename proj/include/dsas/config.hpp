#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsas {

// Layered key-value configuration file.
//
// Syntax:
//   [section]
//   key = value        # trailing comments allowed
//
// Values are stored verbatim; numeric accessors parse on demand. Doubles are
// written back with 17 significant digits so a load/save cycle is bit-exact.
class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  std::string serialize() const;
  void save(const std::string& path) const;

  bool has(const std::string& section, const std::string& key) const;

  const std::string& text(const std::string& section,
                          const std::string& key) const;
  std::string text_or(const std::string& section, const std::string& key,
                      const std::string& fallback) const;

  double number(const std::string& section, const std::string& key) const;
  double number_or(const std::string& section, const std::string& key,
                   double fallback) const;

  std::vector<double> numbers(const std::string& section,
                              const std::string& key) const;

  void set_text(const std::string& section, const std::string& key,
                const std::string& value);
  void set_number(const std::string& section, const std::string& key,
                  double value);
  void set_numbers(const std::string& section, const std::string& key,
                   const std::vector<double>& values);

  std::vector<std::string> sections() const;
  std::vector<std::string> keys(const std::string& section) const;

 private:
  struct Entry {
    std::string section;
    std::string key;
    std::string value;
  };
  // Insertion-ordered so serialization is deterministic.
  std::vector<Entry> entries_;

  const Entry* find(const std::string& section, const std::string& key) const;
  Entry* find(const std::string& section, const std::string& key);
};

// 17-significant-digit decimal rendering used by every text format in the
// project (configs, model files, gains files, CSV traces).
std::string format_double(double v);

}  // namespace dsas

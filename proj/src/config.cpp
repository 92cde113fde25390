#include "dsas/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dsas {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config: malformed section header at line " +
                                 std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: missing '=' at line " +
                               std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config: empty key at line " +
                               std::to_string(lineno));
    cfg.set_text(section, key, value);
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string Config::serialize() const {
  std::ostringstream out;
  std::string current;
  bool first = true;
  for (const auto& e : entries_) {
    if (first || e.section != current) {
      if (!first) out << "\n";
      out << "[" << e.section << "]\n";
      current = e.section;
      first = false;
    }
    out << e.key << " = " << e.value << "\n";
  }
  return out.str();
}

void Config::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  out << serialize();
}

const Config::Entry* Config::find(const std::string& section,
                                  const std::string& key) const {
  for (const auto& e : entries_)
    if (e.section == section && e.key == key) return &e;
  return nullptr;
}

Config::Entry* Config::find(const std::string& section,
                            const std::string& key) {
  for (auto& e : entries_)
    if (e.section == section && e.key == key) return &e;
  return nullptr;
}

bool Config::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

const std::string& Config::text(const std::string& section,
                                const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e)
    throw std::runtime_error("config: missing key [" + section + "] " + key);
  return e->value;
}

std::string Config::text_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : fallback;
}

double Config::number(const std::string& section,
                      const std::string& key) const {
  const std::string& v = text(section, key);
  size_t pos = 0;
  double d = std::stod(v, &pos);
  if (pos != v.size())
    throw std::runtime_error("config: non-numeric value for [" + section +
                             "] " + key);
  return d;
}

double Config::number_or(const std::string& section, const std::string& key,
                         double fallback) const {
  return has(section, key) ? number(section, key) : fallback;
}

std::vector<double> Config::numbers(const std::string& section,
                                    const std::string& key) const {
  std::istringstream in(text(section, key));
  std::vector<double> out;
  double d;
  while (in >> d) out.push_back(d);
  if (!in.eof())
    throw std::runtime_error("config: malformed number list for [" + section +
                             "] " + key);
  return out;
}

void Config::set_text(const std::string& section, const std::string& key,
                      const std::string& value) {
  if (Entry* e = find(section, key)) {
    e->value = value;
    return;
  }
  // Keep sections contiguous: insert after the last entry of the section.
  size_t pos = entries_.size();
  for (size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].section == section) pos = i + 1;
  entries_.insert(entries_.begin() + pos, Entry{section, key, value});
}

void Config::set_number(const std::string& section, const std::string& key,
                        double value) {
  set_text(section, key, format_double(value));
}

void Config::set_numbers(const std::string& section, const std::string& key,
                         const std::vector<double>& values) {
  std::string v;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) v += " ";
    v += format_double(values[i]);
  }
  set_text(section, key, v);
}

std::vector<std::string> Config::sections() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    bool seen = false;
    for (const auto& s : out) seen = seen || s == e.section;
    if (!seen) out.push_back(e.section);
  }
  return out;
}

std::vector<std::string> Config::keys(const std::string& section) const {
  std::vector<std::string> out;
  for (const auto& e : entries_)
    if (e.section == section) out.push_back(e.key);
  return out;
}

}  // namespace dsas

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace locball::experiments {

/// Every pass/fail threshold used by the experiments, in one table.
/// Values can be overridden per run; unknown names are rejected.
class Tolerances {
 public:
  struct Entry {
    double value;
    std::string description;
  };

  Tolerances();

  double operator[](std::string_view name) const;
  void set(const std::string& name, double value);
  bool known(const std::string& name) const { return table_.count(name) != 0; }
  std::vector<std::string> names() const;
  const std::map<std::string, Entry>& table() const { return table_; }

 private:
  std::map<std::string, Entry> table_;
};

}  // namespace locball::experiments

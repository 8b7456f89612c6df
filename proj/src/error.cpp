#include "privguard/error.hpp"

namespace privguard {

ValidationError::ValidationError(std::vector<Issue> issues)
    : Error([&] {
          std::string msg = "invalid DTO:";
          for (const auto& i : issues) msg += " " + i.field + " (" + i.reason + ")";
          return msg;
      }()),
      issues_(std::move(issues))
{
}

std::vector<std::string> ValidationError::fields() const
{
    std::vector<std::string> out;
    for (const auto& i : issues_) out.push_back(i.field);
    return out;
}

}  // namespace privguard

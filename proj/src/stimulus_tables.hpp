#pragma once

#include <span>
#include <string_view>

#include "weber/stimulus.hpp"

namespace weber::stimulus::tables {

struct ProbeEntry {
  double canonical;
  std::string_view surface;
  std::string_view unit;
};

struct Unit {
  double size;  // canonical units per unit
  std::string_view singular;
  std::string_view plural;
};

std::span<const ProbeEntry> probes(Domain domain);
std::span<const std::string_view> carriers(Domain domain);
std::span<const Unit> unit_ladder(Domain domain);

// Contextual (B3) frames: two quantities, referred to by labels.
struct ContextFrame {
  std::string_view sentence;  // "{first}" and "{second}" placeholders
  std::string_view label_first;
  std::string_view label_second;
  std::string_view question;
};

std::span<const ContextFrame> contexts();

}  // namespace weber::stimulus::tables

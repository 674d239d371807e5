#include "stimulus_tables.hpp"

#include <array>

namespace weber::stimulus::tables {
namespace {

constexpr std::array<ProbeEntry, 26> kNumerical{{
    {1, "1", ""},     {2, "2", ""},     {3, "3", ""},     {4, "4", ""},     {5, "5", ""},
    {6, "6", ""},     {7, "7", ""},     {8, "8", ""},     {9, "9", ""},     {10, "10", ""},
    {15, "15", ""},   {20, "20", ""},   {30, "30", ""},   {40, "40", ""},   {50, "50", ""},
    {60, "60", ""},   {70, "70", ""},   {80, "80", ""},   {90, "90", ""},   {100, "100", ""},
    {150, "150", ""}, {200, "200", ""}, {300, "300", ""}, {500, "500", ""}, {700, "700", ""},
    {1000, "1000", ""},
}};

constexpr double kMinute = 60.0;
constexpr double kHour = 3600.0;
constexpr double kDay = 86400.0;
constexpr double kWeek = 7 * kDay;
constexpr double kMonth = 30 * kDay;
constexpr double kYear = 365 * kDay;

constexpr std::array<ProbeEntry, 19> kTemporal{{
    {1, "1 second", "second"},
    {5, "5 seconds", "second"},
    {10, "10 seconds", "second"},
    {30, "30 seconds", "second"},
    {kMinute, "1 minute", "minute"},
    {2 * kMinute, "2 minutes", "minute"},
    {5 * kMinute, "5 minutes", "minute"},
    {10 * kMinute, "10 minutes", "minute"},
    {30 * kMinute, "30 minutes", "minute"},
    {kHour, "1 hour", "hour"},
    {2 * kHour, "2 hours", "hour"},
    {6 * kHour, "6 hours", "hour"},
    {12 * kHour, "12 hours", "hour"},
    {kDay, "1 day", "day"},
    {3 * kDay, "3 days", "day"},
    {kWeek, "1 week", "week"},
    {2 * kWeek, "2 weeks", "week"},
    {kMonth, "1 month", "month"},
    {kYear, "1 year", "year"},
}};

constexpr std::array<ProbeEntry, 14> kSpatial{{
    {1, "1 metre", "metre"},
    {5, "5 metres", "metre"},
    {10, "10 metres", "metre"},
    {50, "50 metres", "metre"},
    {100, "100 metres", "metre"},
    {200, "200 metres", "metre"},
    {500, "500 metres", "metre"},
    {1000, "1 kilometre", "kilometre"},
    {2000, "2 kilometres", "kilometre"},
    {5000, "5 kilometres", "kilometre"},
    {10000, "10 kilometres", "kilometre"},
    {50000, "50 kilometres", "kilometre"},
    {100000, "100 kilometres", "kilometre"},
    {1000000, "1000 kilometres", "kilometre"},
}};

constexpr std::array<std::string_view, 5> kNumericalCarriers{
    "The number {} is a quantity.",
    "She wrote {} on the first page.",
    "The report listed {} as the final figure.",
    "He said the answer was {} after checking.",
    "On the card was printed {} in plain type.",
};

constexpr std::array<std::string_view, 5> kTemporalCarriers{
    "The process took {}.",
    "They waited for {} before leaving.",
    "The recording lasted {} in total.",
    "She was told the delay would be {}.",
    "The task was finished within {}.",
};

constexpr std::array<std::string_view, 5> kSpatialCarriers{
    "The road is {} long.",
    "They walked {} to reach the station.",
    "The distance was measured as {}.",
    "The cable stretched {} across the site.",
    "The river flows for {} before the sea.",
};

constexpr std::array<Unit, 1> kCountUnits{{{1, "", ""}}};
constexpr std::array<Unit, 5> kTimeUnits{{
    {1, "second", "seconds"},
    {kMinute, "minute", "minutes"},
    {kHour, "hour", "hours"},
    {kDay, "day", "days"},
    {kWeek, "week", "weeks"},
}};
constexpr std::array<Unit, 2> kLengthUnits{{
    {1, "metre", "metres"},
    {1000, "kilometre", "kilometres"},
}};

constexpr std::array<ContextFrame, 5> kContexts{{
    {"A bakery sold {first} loaves on Monday and {second} loaves on Tuesday.", "Monday", "Tuesday",
     "On which day did the bakery sell more loaves?"},
    {"The north field held {first} sheep while the south field held {second} sheep.", "the north field",
     "the south field", "Which field held more sheep?"},
    {"Library one lent out {first} books this week; library two lent out {second}.", "library one",
     "library two", "Which library lent out more books?"},
    {"The red team scored {first} points and the blue team scored {second} points.", "the red team",
     "the blue team", "Which team scored more points?"},
    {"The morning train carried {first} passengers and the evening train carried {second}.",
     "the morning train", "the evening train", "Which train carried more passengers?"},
}};

}  // namespace

std::span<const ProbeEntry> probes(Domain domain) {
  switch (domain) {
    case Domain::numerical: return kNumerical;
    case Domain::temporal: return kTemporal;
    case Domain::spatial: return kSpatial;
  }
  return {};
}

std::span<const std::string_view> carriers(Domain domain) {
  switch (domain) {
    case Domain::numerical: return kNumericalCarriers;
    case Domain::temporal: return kTemporalCarriers;
    case Domain::spatial: return kSpatialCarriers;
  }
  return {};
}

std::span<const Unit> unit_ladder(Domain domain) {
  switch (domain) {
    case Domain::numerical: return kCountUnits;
    case Domain::temporal: return kTimeUnits;
    case Domain::spatial: return kLengthUnits;
  }
  return {};
}

std::span<const ContextFrame> contexts() { return kContexts; }

}  // namespace weber::stimulus::tables

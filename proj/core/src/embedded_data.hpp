#pragma once

// Shipped data files compiled into the library (see data/).

namespace eerec::embedded {

extern const char* const kMessageTemplates;
extern const char* const kOfficeWeekSpec;

}  // namespace eerec::embedded

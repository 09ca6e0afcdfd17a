#include "avdelay/records.hpp"

namespace avdelay {

void FlightRecord::refresh_delays() {
  dep_delay_min = actual_dep ? std::optional(minutes_between(*actual_dep, sched_dep)) : std::nullopt;
  arr_delay_min = actual_arr ? std::optional(minutes_between(*actual_arr, sched_arr)) : std::nullopt;
}

}  // namespace avdelay

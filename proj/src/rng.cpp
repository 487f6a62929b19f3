#include "qndsim/rng.hpp"

namespace qndsim {

std::uint64_t mix64(std::uint64_t value) {
  value += 0x9e3779b97f4a7c15ULL;
  value = (value ^ (value >> 30)) * 0xbf58476d1ce4e5b9ULL;
  value = (value ^ (value >> 27)) * 0x94d049bb133111ebULL;
  return value ^ (value >> 31);
}

NormalSource::NormalSource(std::uint64_t seed) : engine_(mix64(seed)) {}

NormalSource NormalSource::substream(std::uint64_t master_seed, std::uint64_t index) {
  return NormalSource(mix64(master_seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

double NormalSource::operator()() { return normal_(engine_); }

}  // namespace qndsim

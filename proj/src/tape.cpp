#include "hyst/tape.hpp"

namespace hyst::ad {

template class Tape<double>;
template class Tape<long double>;

}  // namespace hyst::ad

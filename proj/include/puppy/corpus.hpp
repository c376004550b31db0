#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "puppy/track.hpp"

namespace puppy {

// Seed from PUPPY_SEED when set, else the given default.
std::uint64_t corpus_seed(std::uint64_t fallback = 20240611);

// Star-shaped simple polygon with 4-decimal coordinates (about 10 units
// across), no acute or right angles and no degeneracy of any type.
Track random_generic_polygon(std::mt19937_64& rng, int min_n = 5, int max_n = 20);

// Simple orthogonal polygon traced around a random polyomino with random
// column widths and row heights.
Track random_orthogonal_polygon(std::mt19937_64& rng, int cells = 12);

// Simple polygon with at least one acute angle or exact right angle.
Track random_degenerate_polygon(std::mt19937_64& rng);

std::vector<Track> generic_corpus(std::uint64_t seed, int count);

}  // namespace puppy

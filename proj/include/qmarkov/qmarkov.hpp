#pragma once

#include "qmarkov/assignment.hpp"
#include "qmarkov/channel.hpp"
#include "qmarkov/density.hpp"
#include "qmarkov/entropy.hpp"
#include "qmarkov/errors.hpp"
#include "qmarkov/json_io.hpp"
#include "qmarkov/layout.hpp"
#include "qmarkov/linalg.hpp"
#include "qmarkov/local_env.hpp"
#include "qmarkov/markov.hpp"
#include "qmarkov/matrix.hpp"
#include "qmarkov/random.hpp"
#include "qmarkov/scenarios.hpp"
#include "qmarkov/tensor.hpp"
#include "qmarkov/two_sided.hpp"
#include "qmarkov/weyl.hpp"

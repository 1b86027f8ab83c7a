#include "foliate/error.hpp"

#pragma once

#include "pcbsh/bench.hpp"
#include "pcbsh/bsh.hpp"
#include "pcbsh/collision.hpp"
#include "pcbsh/error.hpp"
#include "pcbsh/geometry.hpp"
#include "pcbsh/model.hpp"
#include "pcbsh/morton.hpp"
#include "pcbsh/oracle.hpp"
#include "pcbsh/path.hpp"
#include "pcbsh/pointcloud.hpp"
#include "pcbsh/scene.hpp"
#include "pcbsh/spatial.hpp"
#include "pcbsh/synthetic.hpp"

#pragma once

#include <string_view>

#include "xnet/geometry.hpp"

namespace xnet {

enum class ChannelOp { none, move, suspend, resume, restart };

inline std::string_view to_string(ChannelOp op) {
  switch (op) {
    case ChannelOp::none: return "none";
    case ChannelOp::move: return "move";
    case ChannelOp::suspend: return "suspend";
    case ChannelOp::resume: return "resume";
    case ChannelOp::restart: return "restart";
  }
  return "none";
}

/// Shared between the Move X-net hooks and the motion backend. Hooks write
/// target_operation; current_position is copied back from the world.
struct MotionChannel {
  ChannelOp target_operation = ChannelOp::none;
  Vec2 target_position;
  Vec2 current_position;
  double speed = 1.0;
};

}  // namespace xnet

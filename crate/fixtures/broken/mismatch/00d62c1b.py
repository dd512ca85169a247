def solver_virtual(I):
  x1 = as_objects(grid=I, discard_background=False)
  x2 = color_filter(objs=x1, color=COLOR_ZERO)
  x3 = fix_last_argument(function=bordering, fixed_arg=I)
  x4 = compose(outer=logical_not, inner=x3)
  x5 = keep_if_condition_and_flatten(container=x2, condition=x4)
  O = fill(grid=I, color=COLOR_TWO, patch=x5)
  return dict(I=I,x1=x1,x2=x2,x5=x5,O=O)

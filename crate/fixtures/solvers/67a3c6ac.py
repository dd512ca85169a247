def solver_virtual(I):
  O = vertical_mirror(grid=I)
  return dict(I=I,O=O)

def solver_virtual(I):
  O = horizontal_mirror(grid=I)
  return dict(I=I,O=O)

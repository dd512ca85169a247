def solver_virtual(I):
  O = diagonal_mirror(grid=I)
  return dict(I=I,O=O)

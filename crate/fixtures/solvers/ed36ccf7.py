def solver_virtual(I):
  O = rot270(grid=I)
  return dict(I=I,O=O)

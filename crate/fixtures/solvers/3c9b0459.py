def solver_virtual(I):
  O = rot180(grid=I)
  return dict(I=I,O=O)

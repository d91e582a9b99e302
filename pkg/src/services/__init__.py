"""計算層: 組合せ論、Z_N バックエンド、熱力学量。"""

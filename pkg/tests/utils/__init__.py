# test utilities package 
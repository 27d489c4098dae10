# unit tests package 
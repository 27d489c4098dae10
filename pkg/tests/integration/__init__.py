# integration tests package 